"""
Description: Runs suites concurrently and merges their results by suite name.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

from orliczlab.exceptions import InputError

from .suites import BATTERIES, get_suite_classes

logger = logging.getLogger(__name__)


def run_suite(cls, context):
    suite = cls()
    return suite.run(**cls.accepted(context))


def run_battery(battery, context, workers=1, only=None):
    """
    Runs the suites of ``battery`` with the parameters they accept from
    ``context``.

    Args:
        battery: "lab" or "selftest".
        context: parameter values shared by the suites.
        workers: suites run at the same time; results do not depend on it.
        only: optional suite names to restrict the run to.

    Returns:
        dict: {suite name: suite output}, ordered by name.

    Raises:
        InputError: unknown battery or suite name.
    """
    if battery not in BATTERIES:
        raise InputError(f"Unknown battery {battery!r}; expected one of {BATTERIES}")
    suites = get_suite_classes(battery)
    if only:
        unknown = sorted(set(only) - set(suites))
        if unknown:
            raise InputError(f"Unknown suites {unknown}; expected some of {sorted(suites)}")
        suites = {name: cls for name, cls in suites.items() if name in only}
    names = sorted(suites)
    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
        outputs = list(pool.map(lambda name: run_suite(suites[name], context), names))
    results = dict(zip(names, outputs))
    for name, output in results.items():
        total, passed, failed, skipped = output["summary"]
        logger.info(
            f"{name}: {output['result']} ({passed} passed, {failed} failed, {skipped} skipped)"
        )
    return results


def battery_passed(results):
    return all(output["result"] == "PASS" for output in results.values())
