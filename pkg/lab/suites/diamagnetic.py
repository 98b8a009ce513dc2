"""
Description: Fractional and local diamagnetic inequalities on the built-in
(u, A) combinations.
"""

from lab.fixtures import builtin_pairs
from lab.inequalities import diamagnetic_check, local_diamagnetic_check

from .base import LabSuite, depends_on

DIAMAGNETIC_ORDERS = (0.3, 0.6, 0.9)


class DiamagneticSuite(LabSuite):
    name = "diamagnetic"
    battery = ("lab", "selftest")

    _params = [
        {"name": "grid"},
        {"name": "seed"},
        {"name": "orders", "requirement": "optional"},
    ]

    def _setup(self):
        self.pairs = builtin_pairs(self.grid, self.seed)
        self.orders = getattr(self, "orders", DIAMAGNETIC_ORDERS)

    def check_fractional(self):
        """Zero violations over all grid pairs at every order."""
        ok = True
        for label, u, A in self.pairs:
            for s in self.orders:
                report = diamagnetic_check(u, A, s)
                ok &= self.record(
                    f"fractional:{label}", report.worst_lhs, report.worst_rhs, report.passed, s
                )
        return ok

    @depends_on("check_fractional")
    def check_real_equality(self):
        """A real nonnegative field with A = 0 turns every pair into an equality."""
        label, u, A = self.pairs[0]
        report = diamagnetic_check(u, A, self.orders[0])
        return self.record(f"equality:{label}", report.strict, 0, report.strict == 0)

    @depends_on("check_fractional")
    def check_phase_strictness(self):
        """A phase-carrying field with A = 0 is strict at some pairs."""
        label, u, A = self.pairs[1]
        report = diamagnetic_check(u, A, self.orders[0])
        return self.record(f"strict:{label}", report.strict, 0, report.strict > 0)

    def check_local(self):
        """|grad |u|| <= |grad u - i A u| away from the zero set of u."""
        ok = True
        for label, u, A in self.pairs:
            report = local_diamagnetic_check(u, A)
            ok &= self.record(f"local:{label}", report.worst_lhs, report.worst_rhs, report.passed)
        return ok
