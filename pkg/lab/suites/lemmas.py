"""
Description: Bounded-ratio regressions for the modular bounds of mollified
and truncated fields, the A <-> 0 equivalence and the local bound of the
fractional magnetic modular, plus their behaviour under u -> alpha u.
"""

import json
import logging
import math

from django.conf import settings

from lab.fixtures import builtin_fields
from lab.inequalities import RATIOS, gauge_pair_ratio, lemma_ratios, scaling_check
from orliczlab.exceptions import InputError

from .base import LabSuite, depends_on

logger = logging.getLogger(__name__)

GAUGE_SHIFT = 1.0
GAUGE_TOLERANCE = 1e-8
SCALING_SLACK = 1e-9
LEMMA_FIELDS = ("gaussian", "bump")


def load_ceilings(family, path=None):
    """
    Ceilings of r1..r4 for ``family`` from the ceilings JSON, falling back to
    its "default" entry.

    Raises:
        InputError: the file is missing, malformed or lacks a ratio.
    """
    path = path or settings.CEILINGS_PATH
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read ratio ceilings from {path}: {e}")
    ceilings = data.get("families", {}).get(family) or data.get("default")
    if not ceilings or any(r not in ceilings for r in RATIOS):
        raise InputError(f"{path} has no complete ceilings for {family} and no default")
    return {r: float(ceilings[r]) for r in RATIOS}


class LemmaRatioSuite(LabSuite):
    name = "lemma_ratios"
    battery = ("lab", "selftest")

    _params = [
        {"name": "orlicz"},
        {"name": "grid"},
        {"name": "A"},
        {"name": "s_ladder"},
        {"name": "cfg"},
        {"name": "seed"},
        {"name": "ceilings_path", "requirement": "optional"},
    ]

    def _setup(self):
        self.ceilings = load_ceilings(self.orlicz.name, getattr(self, "ceilings_path", None))
        fields = builtin_fields(self.grid, self.seed)
        self.fields = {label: fields[label] for label in LEMMA_FIELDS}

    def check_ratios(self):
        """Every ratio is finite and below its ceiling."""
        ok = True
        for label, u in self.fields.items():
            for s in self.s_ladder:
                ratios = lemma_ratios(self.orlicz, u, self.A, s, self.cfg)
                for r in RATIOS:
                    value, ceiling = ratios[r], self.ceilings[r]
                    ok &= self.record(
                        f"{r}:{label}", value, ceiling, math.isfinite(value) and value <= ceiling, s
                    )
        return ok

    def check_zero_field(self):
        """The zero field is a vacuous pass with all ratios 0."""
        zero = self.fields["bump"].scaled(0.0)
        ratios = lemma_ratios(self.orlicz, zero, self.A, self.s_ladder[0], self.cfg)
        return all(v == 0.0 for v in ratios.values())

    @depends_on("check_ratios")
    def check_gauge_pair(self):
        """r4 agrees for (u, A) and (e^{i c.x} u, A + c)."""
        ok = True
        s = self.s_ladder[-1]
        for label, u in self.fields.items():
            base, shifted = gauge_pair_ratio(self.orlicz, u, self.A, s, GAUGE_SHIFT, self.cfg)
            gap = abs(shifted - base) / max(abs(base), 1e-300)
            ok &= self.record(f"gauge:{label}", shifted, base, gap <= GAUGE_TOLERANCE, s)
        return ok


class ScalingSuite(LabSuite):
    name = "scaling"
    battery = ("lab", "selftest")

    _params = [
        {"name": "orlicz"},
        {"name": "grid"},
        {"name": "A"},
        {"name": "s_ladder"},
        {"name": "cfg"},
        {"name": "seed"},
    ]

    def _setup(self):
        self.u = builtin_fields(self.grid, self.seed)["gaussian"]

    def check_scaled_ratio(self):
        """r4(alpha u) / r4(u) stays within the power factors of alpha."""
        ok = True
        s = self.s_ladder[len(self.s_ladder) // 2]
        for row in scaling_check(self.orlicz, self.u, self.A, s, cfg=self.cfg):
            bound = row["bound"] * (1.0 + SCALING_SLACK)
            change = row["change"]
            ok &= self.record(
                f"scaling:alpha={row['alpha']:g}", change, bound,
                1.0 / bound <= change <= bound, s,
            )
        return ok
