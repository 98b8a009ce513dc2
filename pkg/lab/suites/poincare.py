"""
Description: The explicit Poincaré inequalities on (-1, 1)^n and the
empirical constants of their fractional forms.
"""

import math

from lab.fixtures import domain_fields, unit_domain
from lab.inequalities import poincare_check

from .base import LabSuite, depends_on, skip_when

PARABOLA_LEFT = 16.0 / 15.0
"""integral of (1 - x^2)^2 over (-1, 1)."""
PARABOLA_RIGHT = 32.0 / 3.0
"""integral of (2 |2 x|)^2 over (-1, 1)."""


class PoincareSuite(LabSuite):
    name = "poincare"
    battery = ("lab", "selftest")

    _params = [
        {"name": "orlicz"},
        {"name": "grid"},
        {"name": "A"},
        {"name": "s_ladder"},
        {"name": "cfg"},
        {"name": "domain", "requirement": "optional"},
    ]

    def _setup(self):
        self.domain = getattr(self, "domain", None) or unit_domain(self.grid.n)
        self.fields = domain_fields(self.grid, self.domain)
        self.reports = {
            label: poincare_check(self.orlicz, u, self.domain, self.A, self.s_ladder, self.cfg)
            for label, u in sorted(self.fields.items())
        }

    def check_gradient_form(self):
        """I_G(u) <= I_G(d grad u)."""
        ok = True
        for label, report in self.reports.items():
            ok &= self.record(
                f"gradient:{label}", report.left, report.gradient_side, report.gradient_holds
            )
        return ok

    def check_magnetic_form(self):
        """I_G(u) <= I_G^A(d u)."""
        ok = True
        for label, report in self.reports.items():
            ok &= self.record(
                f"magnetic:{label}", report.left, report.magnetic_side, report.magnetic_holds
            )
        return ok

    def check_zero_field(self):
        """The zero field satisfies both forms with both sides 0."""
        zero = self.fields["bump"].scaled(0.0)
        report = poincare_check(self.orlicz, zero, self.domain, self.A, (), self.cfg)
        return report.left == report.gradient_side == report.magnetic_side == 0.0

    @skip_when(
        lambda suite: suite.grid.n != 1 or suite.orlicz.name != "powerp:2",
        "analytic parabola values are for G = t^2 in one dimension",
    )
    @depends_on("check_gradient_form")
    def check_parabola_oracle(self):
        """G = t^2 and u = 1 - x^2 give 16/15 and 32/3 up to O(h)."""
        report = self.reports["parabola"]
        tolerance = self.grid.h
        left_ok = self.record(
            "oracle:left", report.left, PARABOLA_LEFT,
            abs(report.left / PARABOLA_LEFT - 1.0) <= tolerance,
        )
        right_ok = self.record(
            "oracle:right", report.gradient_side, PARABOLA_RIGHT,
            abs(report.gradient_side / PARABOLA_RIGHT - 1.0) <= tolerance,
        )
        return left_ok and right_ok

    @depends_on("check_magnetic_form")
    def check_fractional_constants(self):
        """The empirical fractional constants are finite and positive at every s."""
        ok = True
        for label, report in self.reports.items():
            for row in report.fractional:
                c = row["constant"]
                ok &= self.record(
                    f"fractional:{label}", c, row["luxemburg_constant"],
                    math.isfinite(c) and c > 0.0, row["s"],
                )
        return ok
