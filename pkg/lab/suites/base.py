#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Description: Parent-Class for defining check suites.
"""

__version__ = "0.2.0"

import logging
import math
import time
from graphlib import CycleError, TopologicalSorter
from typing import Any, Dict, List

from orliczlab.exceptions import InputError

logger = logging.getLogger(__name__)

ROW_COLUMNS = ("check", "s", "lhs", "rhs", "ratio", "pass")
"""Columns of the report rows collected by every suite."""

STATUSES = ("PASS", "FAIL", "SKIPPED")


# Exceptions
class DependencyException(InputError):
    """Raised when a check depends on an unknown check or on itself through a cycle."""


class ParameterMissingException(InputError):
    """Raised when a required suite parameter is not given."""


class UnknownParameterException(InputError):
    """Raised when a suite receives a parameter it does not declare."""


# Decorators
def skip(arg: str = None):
    """
    Marks a check as skipped, with or without a reason:
    ``@skip`` or ``@skip("reason")``.
    """

    def mark(method, reason=None):
        method._skip = True
        method._skip_reason = reason
        return method

    if callable(arg):
        return mark(arg)
    return lambda method: mark(method, arg)


def skip_when(predicate, reason: str):
    """
    Skips a check when ``predicate(suite)`` holds once the parameters are set.
    """

    def mark(method):
        method._skip_when = predicate
        method._skip_reason = reason
        return method

    return mark


def depends_on(dependency_name: str):
    """
    Runs a check only after ``dependency_name`` passed; otherwise it is skipped.
    """

    def mark(method):
        method._depends_on = dependency_name
        return method

    return mark


def check_order(checks: dict) -> list:
    """
    Names of ``checks`` ({name: method}) such that every check comes after the
    check it depends on. Among checks that are ready at the same time the
    alphabetical order is kept.

    Raises:
        DependencyException: unknown dependency or a dependency cycle.
    """
    sorter = TopologicalSorter()
    for name in sorted(checks):
        dependency = getattr(checks[name], "_depends_on", None)
        if dependency is None:
            sorter.add(name)
            continue
        if dependency not in checks:
            raise DependencyException(f"{dependency} not found for {name}")
        sorter.add(name, dependency)
    try:
        sorter.prepare()
    except CycleError as e:
        raise DependencyException(f"Cycle in check dependencies: {e.args[1]}")
    order = []
    while sorter.is_active():
        ready = sorted(sorter.get_ready())
        order.extend(ready)
        sorter.done(*ready)
    return order


def ratio(lhs, rhs):
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


def _entry(status, message="", duration=0):
    return {"status": status, "message": message or "", "time": duration}


def _summary(results):
    counts = {status: 0 for status in STATUSES}
    for entry in results.values():
        counts[entry["status"]] += 1
    return (len(results), counts["PASS"], counts["FAIL"], counts["SKIPPED"])


class LabSuite:
    """
    Base class for defining and running check suites.

    Checks are methods whose names start with "check_". They may declare a
    dependency with ``@depends_on`` and be skipped with ``@skip`` or
    ``@skip_when``. A check passes when it returns True, None or a string
    (kept as its message) and fails when it returns False or raises. Checks
    may record report rows (check, s, lhs, rhs, ratio, pass) through ``record``.

    Subclasses declare their parameters in ``_params`` and prepare shared
    values in ``_setup``.
    """

    name: str = "suite"
    """ Name of the suite, used for its report files """

    _params: List[Dict[str, Any]] = []
    """ Parameters of the suite: {"name": ..., "requirement": "optional"?} """

    def _setup(self) -> None:
        """
        Called before the checks run, with the parameters already set.
        Fields, potentials and shared modular values are prepared here.
        """

    def _teardown(self) -> None:
        """
        Called after the checks ran.
        """

    @classmethod
    def _get_required_params(cls):
        return [p["name"] for p in cls._params if p.get("requirement") != "optional"]

    @classmethod
    def _get_optional_params(cls):
        return [p["name"] for p in cls._params if p.get("requirement") == "optional"]

    @classmethod
    def accepted(cls, context: dict) -> dict:
        """The entries of ``context`` this suite declares as parameters."""
        names = set(cls._get_required_params()) | set(cls._get_optional_params())
        return {k: v for k, v in context.items() if k in names}

    def record(self, check, lhs, rhs, passed, s=None):
        """Adds a report row and returns ``passed``."""
        self.rows.append(
            {
                "check": check,
                "s": "" if s is None else s,
                "lhs": repr(float(lhs)),
                "rhs": repr(float(rhs)),
                "ratio": repr(float(ratio(lhs, rhs))),
                "pass": bool(passed),
            }
        )
        return bool(passed)

    def _checks(self, prefix):
        return {
            attr: getattr(self, attr)
            for attr in dir(self)
            if attr.startswith(prefix) and callable(getattr(self, attr))
        }

    def _static_skip(self, method):
        if getattr(method, "_skip", False):
            return True
        predicate = getattr(method, "_skip_when", None)
        return bool(predicate and predicate(self))

    def _call(self, check_name, method):
        """Runs one check and returns (passed, message)."""
        try:
            outcome = method()
        except Exception as e:
            return False, f"{e}"
        if outcome is None:
            return True, ""
        if isinstance(outcome, str):
            return True, outcome
        if not isinstance(outcome, bool):
            return False, f"Check method {check_name} must return a boolean, str or None"
        return outcome, "" if outcome else f"Check {check_name} returned False"

    def run(self, check_method_prefix="check_", **kwargs) -> Dict:
        """
        Runs the suite with ``kwargs`` as parameters.

        Returns:
            dict: {
            "result": "PASS"|"FAIL",
            "checks": {name: {"status": "PASS"|"FAIL"|"SKIPPED", "message": str,
                              "time": float (seconds)}},
            "summary": (total, passed, failed, skipped),
            "rows": [report rows]
            }

        Raises:
            ParameterMissingException, UnknownParameterException: bad parameters.
            DependencyException: unknown or cyclic check dependencies.
        """
        self.check_parameter_validity(**kwargs)
        for name, value in kwargs.items():
            setattr(self, name, value)
        self.rows = []

        checks = self._checks(check_method_prefix)
        order = check_order(checks)

        # skips decided before setup, carried along dependency chains
        results = {}
        for check_name in order:
            method = checks[check_name]
            dependency = getattr(method, "_depends_on", None)
            if self._static_skip(method):
                results[check_name] = _entry("SKIPPED", getattr(method, "_skip_reason", None))
            elif dependency in results:
                results[check_name] = _entry("SKIPPED", f"Skipped because {dependency} is skipped")

        try:
            self._setup()
        except Exception as e:
            logger.warning(f"Setup of suite {self.name} failed: {e}")
            for check_name in order:
                results.setdefault(check_name, _entry("FAIL", f"{e}"))
            return self._output(results)

        for check_name in order:
            if check_name in results:
                continue
            method = checks[check_name]
            dependency = getattr(method, "_depends_on", None)
            if dependency and results[dependency]["status"] != "PASS":
                results[check_name] = _entry(
                    "SKIPPED", f"Skipped due to failed dependency: {dependency}"
                )
                continue
            start = time.perf_counter()
            passed, message = self._call(check_name, method)
            duration = time.perf_counter() - start
            if passed:
                logger.debug(f"{self.name}.{check_name} passed in {duration:.3f}s")
            else:
                logger.warning(f"{self.name}.{check_name} failed: {message}")
            results[check_name] = _entry("PASS" if passed else "FAIL", message, duration)

        results = {name: results[name] for name in sorted(results)}
        try:
            self._teardown()
        except Exception as e:
            summary = _summary(results)
            results["teardown"] = _entry("FAIL", f"{e}")
            return {"result": "FAIL", "checks": results, "summary": summary, "rows": self.rows}
        return self._output(results)

    def _output(self, results):
        summary = _summary(results)
        return {
            "result": "PASS" if summary[2] == 0 else "FAIL",
            "checks": results,
            "summary": summary,
            "rows": self.rows,
        }

    def check_parameter_validity(self, **kwargs):
        """
        Compares ``kwargs`` with the declared parameters. Types are not checked.
        """
        required = self._get_required_params()
        known = set(required) | set(self._get_optional_params())
        missing = [p for p in required if p not in kwargs]
        if missing:
            raise ParameterMissingException(f"Missing required parameters: {missing}")
        unknown = [k for k in kwargs if k not in known]
        if unknown:
            raise UnknownParameterException(f"Unknown parameters passed: {unknown}")
