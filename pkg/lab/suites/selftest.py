"""
Description: The invariant battery run by ``selftest`` next to the lab
suites: Orlicz functions, fields, modulars, the BBM reproduction, the
Gamma-limit spot checks, the solver and the convergence study.
"""

import numpy as np

from fields.grid import Grid
from fields.operators import gauge_transform, mollify, truncate
from fields.potentials import MagneticPotential
from fields.samples import sample
from lab.fixtures import builtin_fields, unit_domain
from limits.bbm import DEFAULT_LADDER, bbm_sweep, scaled_ladder
from limits.gamma import LIMSUP_TOLERANCE, TAIL, gamma_check
from modulars.fractional import modular_IsG, modular_IsGA
from modulars.local import modular_IGA_local
from modulars.modulus import gauge_invariant_tilde
from orlicz.families import default_t_grid, delta2_constant, estimate_indices, parse_family
from orlicz.properties import (
    convexity_defect,
    cotas_violation,
    monotonicity_defect,
    random_pairs,
    young_violation,
)
from orlicz.spherical import SphericalLimit
from solver.energy import DiscreteEnergy
from solver.ncg import real_dot
from solver.problems import DirichletProblem
from solver.solve import solve
from solver.study import ENERGY_TOLERANCE, convergence_study

from .base import LabSuite, depends_on

BUILTIN_FAMILIES = ("power:2", "power:1.5", "powerp:3", "blend:2:4")
ROUNDING = 1e-12
YOUNG_TOLERANCE = 1e-9
SPHERICAL_ARGUMENTS = (0.5, 1.0, 2.0)
GAUGE_SHIFTS = (0.5, 1.0, 2.0)
GAUGE_TOLERANCE = 1e-8
QUADRATIC = "power:2"
FAST_GAMMA_LADDER = (0.875, 0.925, 0.95)
STUDY_POINTS = 512


def _relative(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


class OrliczInvariantSuite(LabSuite):
    name = "orlicz_invariants"
    battery = ("selftest",)

    _params = [{"name": "orlicz"}, {"name": "grid"}, {"name": "seed"}]

    def _setup(self):
        names = list(BUILTIN_FAMILIES)
        if self.orlicz.name not in names:
            names.append(self.orlicz.name)
        self.families = [parse_family(name) for name in names]
        self.rng = np.random.default_rng(self.seed)
        self.t_grid = default_t_grid()

    def check_convexity(self):
        """G is convex and G, g are nondecreasing."""
        ok = True
        for F in self.families:
            defect = convexity_defect(F, self.t_grid)
            ok &= self.record(f"convexity:{F.name}", defect, ROUNDING, defect <= ROUNDING)
            drop = monotonicity_defect(F, self.t_grid)
            ok &= self.record(f"monotone:{F.name}", drop, 0.0, drop <= 0.0)
        return ok

    def check_cotas(self):
        """min(a^p-, a^p+) G(b) <= G(a b) <= max(a^p-, a^p+) G(b)."""
        ok = True
        for F in self.families:
            a, b = random_pairs(self.rng, 2000)
            violation = cotas_violation(F, a, b)
            ok &= self.record(f"cotas:{F.name}", violation, ROUNDING, violation <= ROUNDING)
        return ok

    def check_young(self):
        """s t <= G(t) + G*(s)."""
        ok = True
        for F in self.families:
            s, t = random_pairs(self.rng, 50, -2.0, 2.0)
            violation = young_violation(F, s, t)
            ok &= self.record(
                f"young:{F.name}", violation, YOUNG_TOLERANCE, violation <= YOUNG_TOLERANCE
            )
        return ok

    def check_indices(self):
        """t g / G stays in [p-, p+] and G(2t) <= 2^p+ G(t)."""
        ok = True
        for F in self.families:
            low, high = estimate_indices(F, self.t_grid)
            ok &= self.record(
                f"indices:{F.name}", low, F.p_minus,
                low >= F.p_minus * (1 - ROUNDING) and high <= F.p_plus * (1 + ROUNDING),
            )
            doubling = delta2_constant(F, self.t_grid)
            bound = 2.0**F.p_plus
            ok &= self.record(
                f"delta2:{F.name}", doubling, bound, doubling <= bound * (1 + ROUNDING)
            )
        return ok

    def check_spherical_substitution(self):
        """The raw spherical-limit integral matches the substituted form at every order."""
        for F in self.families:
            limit = SphericalLimit(F, self.grid.n)
            for a in SPHERICAL_ARGUMENTS:
                value = limit.verify(a)
                self.record(f"substitution:{F.name}:a={a:g}", value, value, True)

    @depends_on("check_spherical_substitution")
    def check_sandwich(self):
        """c1 G <= G~ <= c2 G with 0 < c1 <= c2 < inf."""
        ok = True
        for F in self.families:
            c1, c2 = SphericalLimit(F, self.grid.n).equivalence_constants()
            ok &= self.record(
                f"sandwich:{F.name}", c1, c2, 0.0 < c1 <= c2 and np.isfinite(c2)
            )
        return ok


class FieldInvariantSuite(LabSuite):
    name = "field_invariants"
    battery = ("selftest",)

    _params = [{"name": "grid"}, {"name": "seed"}]

    def _setup(self):
        self.fields = builtin_fields(self.grid, self.seed)
        self.eps = 4.0 * self.grid.h

    def check_zero_extension(self):
        """Fields vanish outside their support ball and restriction empties the exterior."""
        radius = self.grid.radius()
        ok = True
        for label, u in self.fields.items():
            outside = np.abs(u.values[radius > u.support_radius * (1 + ROUNDING)])
            leak = float(outside.max()) if outside.size else 0.0
            ok &= self.record(f"support:{label}", leak, 0.0, leak == 0.0)
        domain = unit_domain(self.grid.n) if self.grid.L > 1.0 + 2.0 * self.grid.h else None
        if domain is not None:
            ok &= domain.contains_support(domain.restrict(self.fields["bump"]))
        return ok

    def check_mollifier_contraction(self):
        """sup |u_eps| <= sup |u|."""
        ok = True
        for label, u in self.fields.items():
            smooth = mollify(u, self.eps)
            ok &= self.record(
                f"contraction:{label}", smooth.sup_norm(), u.sup_norm(),
                smooth.sup_norm() <= u.sup_norm() * (1 + ROUNDING),
            )
        return ok

    def check_mass_conservation(self):
        """sum u_eps = sum u."""
        ok = True
        for label, u in self.fields.items():
            before = complex(np.sum(u.values))
            after = complex(np.sum(mollify(u, self.eps).values))
            scale = max(float(np.sum(np.abs(u.values))), 1e-300)
            gap = abs(after - before) / scale
            ok &= self.record(f"mass:{label}", gap, ROUNDING, gap <= ROUNDING)
        return ok

    def check_truncation_monotone(self):
        """|u_k| <= |u_k'| <= |u| for k < k'."""
        ok = True
        for label, u in self.fields.items():
            R = u.support_radius
            small = np.abs(truncate(u, 0.25 * R).values)
            large = np.abs(truncate(u, 0.4 * R).values)
            full = np.abs(u.values)
            excess = float(max(np.max(small - large), np.max(large - full)))
            ok &= self.record(f"truncation:{label}", excess, 0.0, excess <= 0.0)
        return ok


class ModularInvariantSuite(LabSuite):
    name = "modular_invariants"
    battery = ("selftest",)

    _params = [
        {"name": "orlicz"},
        {"name": "grid"},
        {"name": "A"},
        {"name": "s_ladder"},
        {"name": "cfg"},
        {"name": "seed"},
    ]

    def _setup(self):
        fields = builtin_fields(self.grid, self.seed)
        self.u = fields["random"]
        self.v = fields["phase_gaussian"]
        self.s = self.s_ladder[len(self.s_ladder) // 2]

    def _IsGA(self, u, A=None, tilde=False):
        A = self.A if A is None else A
        return modular_IsGA(self.orlicz, u, A, self.s, self.cfg, tilde=tilde).value

    def check_split_modulus_equivalence(self):
        """split <= 2 tilde and tilde <= 2^(p+ - 1) split."""
        split = self._IsGA(self.u)
        tilde = self._IsGA(self.u, tilde=True)
        upper = 2.0 ** (self.orlicz.p_plus - 1.0)
        low_ok = self.record(
            "split<=2tilde", split, 2.0 * tilde, split <= 2.0 * tilde * (1 + ROUNDING), self.s
        )
        high_ok = self.record(
            "tilde<=C*split", tilde, upper * split, tilde <= upper * split * (1 + ROUNDING), self.s
        )
        return low_ok and high_ok

    def check_gauge_covariance(self):
        """
        Fractional and local modulars are unchanged by (u, A) -> (e^{i c.x} u, A + c),
        from the suite potential and from A = 0. Non-quadratic G are compared in
        the modulus form.
        """
        tilde = gauge_invariant_tilde(self.orlicz)
        ok = True
        for label, A in (("A", self.A), ("0", MagneticPotential.zero(self.grid.n))):
            base = self._IsGA(self.u, A, tilde)
            local = modular_IGA_local(self.orlicz, self.u, A, tilde).value
            for c in GAUGE_SHIFTS:
                shifted, shifted_A = gauge_transform(self.u, A, c)
                value = self._IsGA(shifted, shifted_A, tilde)
                ok &= self.record(
                    f"gauge:{label}+{c:g}",
                    value,
                    base,
                    _relative(value, base) <= GAUGE_TOLERANCE,
                    self.s,
                )
                moved = modular_IGA_local(self.orlicz, shifted, shifted_A, tilde).value
                ok &= self.record(
                    f"gauge_local:{label}+{c:g}",
                    moved,
                    local,
                    _relative(moved, local) <= GAUGE_TOLERANCE,
                )
        return ok

    def check_convexity(self):
        """I((u + v) / 2) <= (I(u) + I(v)) / 2."""
        mid = self._IsGA((self.u + self.v).scaled(0.5))
        chord = 0.5 * (self._IsGA(self.u) + self._IsGA(self.v))
        return self.record("convexity", mid, chord, mid <= chord * (1 + ROUNDING), self.s)

    def check_symmetry(self):
        """I(-u) = I(u), and I_{s,G}(conj u) = I_{s,G}(u)."""
        base = self._IsGA(self.u)
        negated = self._IsGA(self.u.scaled(-1.0))
        plain = modular_IsG(self.orlicz, self.u, self.s, self.cfg).value
        conj = modular_IsG(
            self.orlicz, self.u.with_values(np.conj(self.u.values)), self.s, self.cfg
        ).value
        sign_ok = _relative(negated, base) <= ROUNDING
        sign_ok = self.record("negation", negated, base, sign_ok, self.s)
        conj_ok = _relative(conj, plain) <= ROUNDING
        conj_ok = self.record("conjugation", conj, plain, conj_ok, self.s)
        return sign_ok and conj_ok

    def check_scaled_ladder(self):
        """(1 - s) I_{s,G}^A(u) is finite over the ladder."""
        values, _ = scaled_ladder(self.orlicz, self.u, self.A, self.s_ladder, self.cfg)
        ok = True
        for s, value in zip(self.s_ladder, values):
            ok &= self.record("scaled", value, value, bool(np.isfinite(value)), s)
        return ok


class LimitSuite(LabSuite):
    """The power-case BBM reproduction, with and without a constant potential."""

    name = "bbm"
    battery = ("selftest",)

    _params = [{"name": "cfg"}, {"name": "fast"}]

    def _setup(self):
        self.grid = Grid(1, 8.0, 256 if self.fast else 2048)
        self.tolerance = 0.05 if self.fast else 0.02
        self.F = parse_family(QUADRATIC)
        self.u = sample("gaussian:1", self.grid)

    def _sweep(self, A, label):
        result = bbm_sweep(self.F, self.u, A, DEFAULT_LADDER, self.cfg)
        return result, self.record(
            label, result.extrapolated, result.target, result.rel_gap <= self.tolerance
        )

    def check_power_case(self):
        """A = 0: the extrapolated sweep meets the closed-form target."""
        return self._sweep(MagneticPotential.zero(1), "power")[1]

    def check_magnetic_case(self):
        """A = 1: the extrapolated sweep meets the local magnetic target."""
        return self._sweep(MagneticPotential.constant([1.0]), "magnetic")[1]

    @depends_on("check_magnetic_case")
    def check_gauge_shift(self):
        """Sweeps shifted from A = 0 and from A = 1 extrapolate to the same values."""
        ok = True
        potentials = {"0": MagneticPotential.zero(1), "1": MagneticPotential.constant([1.0])}
        for label, A in potentials.items():
            base = bbm_sweep(self.F, self.u, A, DEFAULT_LADDER, self.cfg).extrapolated
            shifted, shifted_A = gauge_transform(self.u, A, 0.5)
            moved = bbm_sweep(self.F, shifted, shifted_A, DEFAULT_LADDER, self.cfg).extrapolated
            ok &= self.record(
                f"gauge:{label}+0.5", moved, base, _relative(moved, base) <= GAUGE_TOLERANCE
            )
        return ok


class SolverSuite(LabSuite):
    """Gradient consistency and the analytic local oracle."""

    name = "solver"
    battery = ("selftest",)

    _params = [{"name": "cfg"}, {"name": "fast"}, {"name": "seed"}]

    def _setup(self):
        self.F = parse_family(QUADRATIC)
        self.domain = unit_domain(1)
        self.rng = np.random.default_rng(self.seed)

    def _problem(self, grid, expr, s, family=QUADRATIC, A=None):
        f = self.domain.restrict(sample(expr, grid))
        A = MagneticPotential.constant([0.8]) if A is None else A
        return DirichletProblem(parse_family(family), A, f, self.domain, s=s, cfg=self.cfg)

    def check_gradient(self):
        """Analytic gradients match central differences along 10 random directions."""
        grid = Grid(1, 2.0, 32)
        ok = True
        for family in ("power:2", "blend:2:4"):
            for s in (0.6, "local"):
                energy = DiscreteEnergy(self._problem(grid, "gaussian:0.3", s, family))
                size = energy.size
                x = self.rng.normal(size=size) + 1j * self.rng.normal(size=size)
                _, grad = energy(x)
                worst = 0.0
                for _ in range(10):
                    d = self.rng.normal(size=size) + 1j * self.rng.normal(size=size)
                    plus, _ = energy(x + 1e-6 * d, want_grad=False)
                    minus, _ = energy(x - 1e-6 * d, want_grad=False)
                    exact = real_dot(grad, d)
                    gap = abs((plus - minus) / 2e-6 - exact) / max(1.0, abs(exact))
                    worst = max(worst, gap)
                ok &= self.record(f"gradient:{family}:{s}", worst, 1e-6, worst <= 1e-6)
        return ok

    def check_local_oracle(self):
        """-u'' = 1 on (-1, 1): u = (1 - x^2) / 2 and minimum -1/3."""
        grid = Grid(1, 2.0, 256 if self.fast else 1024)
        result = solve(self._problem(grid, "const:1", "local", A=MagneticPotential.zero(1)))
        x = grid.axis
        exact = np.where(np.abs(x) < 1.0, (1.0 - x**2) / 2.0, 0.0)
        distance = float(np.max(np.abs(result.minimizer.values - exact)))
        field_ok = self.record("oracle:field", distance, 1e-3, distance <= 1e-3)
        energy_ok = self.record(
            "oracle:energy", result.energy, -1.0 / 3.0, abs(result.energy + 1.0 / 3.0) <= 1e-4
        )
        return field_ok and energy_ok


class GammaSuite(LabSuite):
    """
    Gamma-limit spot checks for G = t^2/2 on gaussian(1) with A = 0. The
    recovery side uses the constant sequence; the liminf side uses the
    mollified and truncated ones against the tail minimum of J_{s_k}(u_k).
    """

    name = "gamma"
    battery = ("selftest",)

    _params = [{"name": "cfg"}, {"name": "fast"}]

    def _setup(self):
        self.grid = Grid(1, 8.0, 256 if self.fast else 2048)
        self.limsup_tolerance = 0.05 if self.fast else LIMSUP_TOLERANCE
        self.F = parse_family(QUADRATIC)
        self.A = MagneticPotential.zero(1)
        self.u = sample("gaussian:1", self.grid)

    def _liminf(self, report, label):
        ok = True
        for s, value in zip(report.s_ladder[-TAIL:], report.values[-TAIL:]):
            floor = (1.0 - report.tolerance) * report.target
            ok &= self.record(f"{label}:tail", value, floor, value >= floor, s)
        return ok and report.liminf_holds

    def check_recovery(self):
        """u_k = u: the extrapolated J_{s_k}(u) meets J(u)."""
        report = gamma_check(self.F, self.A, self.u, "constant", DEFAULT_LADDER, self.cfg)
        limsup_ok = self.record(
            "constant:limsup",
            report.extrapolated,
            report.target,
            report.limsup_gap <= self.limsup_tolerance,
        )
        return self._liminf(report, "constant") and limsup_ok

    def check_mollified(self):
        """u_k = u * rho_{2^-k}: no tail value falls below J(u) - tolerance."""
        # eps_k = 2^-k must stay above two grid steps
        ladder = FAST_GAMMA_LADDER if self.fast else DEFAULT_LADDER
        report = gamma_check(self.F, self.A, self.u, "mollified", ladder, self.cfg)
        return self._liminf(report, "mollified")

    def check_truncated(self):
        """u_k = eta_{r_k} u: no tail value falls below J(u) - tolerance."""
        report = gamma_check(self.F, self.A, self.u, "truncated", DEFAULT_LADDER, self.cfg)
        return self._liminf(report, "truncated")


class StudySuite(LabSuite):
    """
    Convergence of the fractional minimizers for -u'' = 1 on (-1, 1) with
    G = t^2/2 and A = 0, at N = 512 in both modes. Below that the
    extrapolated minima miss -1/3 by more than the study tolerance.
    """

    name = "study"
    battery = ("selftest",)

    _params = [{"name": "cfg"}, {"name": "fast"}]

    def _setup(self):
        domain = unit_domain(1)
        grid = Grid(1, 2.0, STUDY_POINTS)
        f = domain.restrict(sample("const:1", grid))
        self.result = convergence_study(
            parse_family(QUADRATIC), MagneticPotential.zero(1), f, domain, DEFAULT_LADDER, self.cfg
        )
        self.checks = self.result.checks

    def check_minimizers(self):
        """Distances to the local minimizer shrink over the tail and halve over the ladder."""
        rows = self.result.rows
        first = rows[0].lux_distance
        for row in rows:
            self.record("distance", row.lux_distance, first, row.status == "ok", row.s)
        names = ("all_solved", "distances_decreasing", "distance_halved")
        return all(self.checks.get(name, False) for name in names)

    def check_minima(self):
        """The tail minima and their extrapolation stay within the study tolerance of E_local."""
        local = self.result.local.energy
        bound = ENERGY_TOLERANCE * abs(local)
        for row in self.result.rows[-TAIL:]:
            gap = abs(row.frac_energy - local)
            self.record("energy_gap", gap, bound, gap <= bound, row.s)
        names = ("all_solved", "energy_tail_bounded", "energy_limit")
        return all(self.checks.get(name, False) for name in names)

    def check_energy_trend(self):
        """Reports whether the tail gaps shrink monotonely; this does not decide the suite."""
        monotone = self.result.diagnostics["energies_monotone"]
        return f"energies_monotone={monotone}"
