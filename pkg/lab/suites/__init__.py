import importlib
import importlib.resources
import inspect
import logging

from .base import LabSuite

logger = logging.getLogger(__name__)

PACKAGE = "lab.suites"
BATTERIES = ("lab", "selftest")


def get_suite_classes(battery=None):
    """
    Return {name: class} of every built-in suite, optionally restricted to
    the suites that belong to ``battery``.
    """
    suites = {}
    for resource in sorted(importlib.resources.files(PACKAGE).iterdir(), key=lambda r: r.name):
        if (
            resource.suffix != ".py"
            or not resource.is_file()
            or resource.name in ["__init__.py", "base.py"]
        ):
            continue
        module = importlib.import_module(f"{PACKAGE}.{resource.stem}")
        for _, cls in inspect.getmembers(module, inspect.isclass):
            if not issubclass(cls, LabSuite) or cls is LabSuite:
                continue
            if cls.__module__ != module.__name__:
                continue
            if battery is None or battery in getattr(cls, "battery", ()):
                suites[cls.name] = cls
    logger.debug(f"Suites for {battery or 'all'}: {sorted(suites)}")
    return dict(sorted(suites.items()))
