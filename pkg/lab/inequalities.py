"""
Description: Numerical checks of the diamagnetic and Poincaré inequalities
and of the modular bounds for mollified and truncated fields.

Explicit inequalities are asserted; estimates whose constants are not
explicit are reduced to ratios that suites compare against pinned ceilings.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from fields.operators import gauge_transform, mollify, truncate
from fields.potentials import MagneticPotential
from modulars.fractional import modular_IsG, modular_IsGA
from modulars.local import covariant_gradient, modular_IG, modular_IGA_local
from modulars.luxemburg import luxemburg_from_function, luxemburg_norm, modular_function
from modulars.modulus import gauge_invariant_tilde
from modulars.quotient import check_order, pair_quotient
from orliczlab.exceptions import InputError

logger = logging.getLogger(__name__)

PAIR_TOLERANCE = 1e-14
"""Slack of the pairwise diamagnetic test, relative to max(1, sup |u|)."""
ROW_CHUNK = 256
POINCARE_SLACK = 10.0
"""The explicit Poincaré inequalities are tested with rhs (1 + POINCARE_SLACK h)."""
MOLLIFIER_CELLS = 4
RATIOS = ("r1", "r2", "r3", "r4")


@dataclass
class DiamagneticReport:
    kind: str
    s: float = None
    pairs: int = 0
    violations: int = 0
    worst_margin: float = -math.inf
    worst_lhs: float = 0.0
    worst_rhs: float = 0.0
    strict: int = 0

    @property
    def passed(self):
        return self.violations == 0


def _merge(report, lhs, rhs, tolerance):
    """Folds a block of (lhs, rhs) values into the report."""
    if lhs.size == 0:
        return
    margin = lhs - rhs
    report.pairs += int(lhs.size)
    report.violations += int(np.count_nonzero(margin > tolerance))
    report.strict += int(np.count_nonzero(margin < -tolerance))
    worst = int(np.argmax(margin))
    if margin.flat[worst] > report.worst_margin:
        report.worst_margin = float(margin.flat[worst])
        report.worst_lhs = float(lhs.flat[worst])
        report.worst_rhs = float(rhs.flat[worst])


def diamagnetic_check(u, A, s):
    """
    Tests | D_s|u|(x, y) | <= | D_s^A u(x, y) | on every pair of distinct grid
    nodes with u(x) != 0. Pairs where u vanishes at both ends are 0 <= 0.

    Both sides share |x - y|^s, so numerators are compared and margins are
    reported in numerator units.

    Returns:
        DiamagneticReport
    """
    s = check_order(s)
    grid = u.grid
    points = grid.points().reshape(-1, grid.n)
    values = u.values.ravel()
    moduli = np.abs(values)
    tolerance = PAIR_TOLERANCE * max(1.0, u.sup_norm())
    report = DiamagneticReport(kind="fractional", s=s)
    rows = np.flatnonzero(values)
    for start in range(0, rows.size, ROW_CHUNK):
        block = rows[start : start + ROW_CHUNK]
        x = points[block][:, None, :]
        y = points[None, :, :]
        # numerators of D_s^A u with |x - y|^0
        rhs = np.abs(pair_quotient(values[block][:, None], values[None, :], x, y, A, 0.0))
        lhs = np.abs(moduli[block][:, None] - moduli[None, :])
        distinct = block[:, None] != np.arange(values.size)[None, :]
        _merge(report, lhs[distinct], rhs[distinct], tolerance)
    if not report.passed:
        logger.warning(
            f"Diamagnetic violations for {u.label}, A={A}, s={s}: {report.violations}"
        )
    return report


def local_diamagnetic_check(u, A):
    """
    Tests |grad |u|| <= |grad u - i A u| at the nodes where
    |u| > 10 h ||grad u||_inf, with central differences on both sides.

    Returns:
        DiamagneticReport
    """
    grid = u.grid
    modulus = u.with_values(np.abs(u.values), label=f"|{u.label}|")
    plain = covariant_gradient(modulus, MagneticPotential.zero(grid.n))
    lhs = np.linalg.norm(np.abs(plain), axis=-1)
    rhs = np.linalg.norm(np.abs(covariant_gradient(u, A)), axis=-1)
    free = covariant_gradient(u, MagneticPotential.zero(grid.n))
    sup_grad = float(np.max(np.linalg.norm(np.abs(free), axis=-1)))
    mask = np.abs(u.values) > 10.0 * grid.h * sup_grad
    report = DiamagneticReport(kind="local")
    _merge(report, lhs[mask], rhs[mask], PAIR_TOLERANCE * max(1.0, sup_grad))
    return report


@dataclass
class PoincareReport:
    diameter: float
    left: float
    gradient_side: float
    magnetic_side: float
    tolerance: float
    fractional: list = field(default_factory=list)

    @property
    def gradient_holds(self):
        return self.left <= self.gradient_side * (1.0 + self.tolerance)

    @property
    def magnetic_holds(self):
        return self.left <= self.magnetic_side * (1.0 + self.tolerance)

    @property
    def passed(self):
        return self.gradient_holds and self.magnetic_holds


def gradient_modulus_modular(F, u, scale=1.0):
    """integral G(scale |Re grad u|) + G(scale |Im grad u|) with central differences."""
    grad = covariant_gradient(u, MagneticPotential.zero(u.grid.n))
    re = np.linalg.norm(grad.real, axis=-1)
    im = np.linalg.norm(grad.imag, axis=-1)
    return u.grid.cell_volume * float(np.sum(F.G(scale * re) + F.G(scale * im)))


def fractional_poincare_constant(F, u, A, s, diameter, cfg=None, left=None):
    """
    The smallest c with I_G(u) <= I_{s,G}^A((1 - s) c d^s u), by bisection.

    Returns:
        float: 0 for the zero field.
    """
    s = check_order(s)
    left = modular_IG(F, u).value if left is None else left
    if left == 0.0:
        return 0.0
    modular = modular_function("IsGA", F, u, A, s, cfg)
    # modular(lam) = I_{s,G}^A(u / lam); solve modular(lam) = I_G(u)
    lam = luxemburg_from_function(lambda x: modular(x) / left, label=u.label)
    return 1.0 / ((1.0 - s) * diameter**s * lam)


def poincare_check(F, u, domain, A, s_ladder=(), cfg=None):
    """
    Tests I_G(u) <= I_G(d |grad u|) and I_G(u) <= I_G^A(d u) for d = diam(Omega),
    and records the empirical fractional constants at every s of the ladder
    together with the Luxemburg form ||u||_G / ((1 - s) |u|_{s,G}^A).

    Raises:
        InputError: u is not supported in Omega.
    """
    if not domain.contains_support(u):
        raise InputError(f"{u.label} is not supported in the domain {domain.as_dict()}")
    d = domain.diameter
    left = modular_IG(F, u).value
    report = PoincareReport(
        diameter=d,
        left=left,
        gradient_side=gradient_modulus_modular(F, u, d),
        magnetic_side=modular_IGA_local(F, u.scaled(d), A).value,
        tolerance=POINCARE_SLACK * u.grid.h,
    )
    norm = luxemburg_norm(F, u)
    for s in s_ladder:
        c = fractional_poincare_constant(F, u, A, s, d, cfg, left=left)
        seminorm = luxemburg_norm(F, u, kind="IsGA", s=s, A=A, cfg=cfg)
        c_norm = norm / ((1.0 - s) * seminorm) if seminorm else 0.0
        report.fractional.append({"s": s, "constant": c, "luxemburg_constant": c_norm})
    if not report.passed:
        logger.warning(
            f"Poincaré inequality fails for {u.label}: {left!r} vs "
            f"{report.gradient_side!r}, {report.magnetic_side!r}"
        )
    return report


def _quotient(numerator, denominator):
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return numerator / denominator


def lemma_ratios(F, u, A, s, cfg=None, tilde=False):
    """
    The four bound ratios at order s:

        r1 = I(u_eps) / [I(u) + (1/s + 1/(1-s)) I_G(u)],              eps = 4h
        r2 = I(u_k) / [I(u) + (1/s + 1/(k (1-s))) I_G(u)],            k = R/2
        r3 = max of I_{s,G}(u) and I(u) each over [other + (1/s + 1/(1-s)) I_G(u)]
        r4 = I(u) / [(1/s + 1/(1-s)) I_G(u) + I_G^A(u) / (1-s)]

    with I = I_{s,G}^A, all modulars in the modulus form with ``tilde``. The
    zero field gives zeros.
    """
    s = check_order(s)
    if u.is_zero():
        return dict.fromkeys(RATIOS, 0.0)
    weight = 1.0 / s + 1.0 / (1.0 - s)
    IG = modular_IG(F, u, tilde).value
    magnetic = modular_IsGA(F, u, A, s, cfg, tilde).value
    plain = modular_IsG(F, u, s, cfg, tilde).value
    mollified = modular_IsGA(F, mollify(u, MOLLIFIER_CELLS * u.grid.h), A, s, cfg, tilde).value
    k = 0.5 * u.support_radius
    truncated = modular_IsGA(F, truncate(u, k), A, s, cfg, tilde).value
    local = modular_IGA_local(F, u, A, tilde).value
    return {
        "r1": _quotient(mollified, magnetic + weight * IG),
        "r2": _quotient(truncated, magnetic + (1.0 / s + 1.0 / (k * (1.0 - s))) * IG),
        "r3": max(
            _quotient(plain, magnetic + weight * IG),
            _quotient(magnetic, plain + weight * IG),
        ),
        "r4": _quotient(magnetic, weight * IG + local / (1.0 - s)),
    }


def lemma_ratio_suite(F, u, A, s_ladder, cfg=None):
    """Rows {s, r1, r2, r3, r4} for every s of the ladder."""
    return [{"s": s, **lemma_ratios(F, u, A, s, cfg)} for s in s_ladder]


def gauge_pair_ratio(F, u, A, s, c, cfg=None):
    """
    (r4 of (u, A), r4 of (e^{i c.x} u, A + c)), in the form that is gauge
    invariant for F.
    """
    tilde = gauge_invariant_tilde(F)
    shifted, shifted_A = gauge_transform(u, A, c)
    return (
        lemma_ratios(F, u, A, s, cfg, tilde)["r4"],
        lemma_ratios(F, shifted, shifted_A, s, cfg, tilde)["r4"],
    )


def scaling_bounds(F, alpha):
    """max / min of alpha^p- and alpha^p+, the widest change of a ratio under u -> alpha u."""
    powers = (alpha**F.p_minus, alpha**F.p_plus)
    return max(powers) / min(powers)


def scaling_check(F, u, A, s, alphas=(0.5, 2.0), cfg=None):
    """
    Rows {alpha, ratio, change, bound} comparing r4 of alpha u with r4 of u;
    ``change`` must lie in [1 / bound, bound].
    """
    base = lemma_ratios(F, u, A, s, cfg)["r4"]
    rows = []
    for alpha in alphas:
        scaled = lemma_ratios(F, u.scaled(alpha), A, s, cfg)["r4"]
        change = _quotient(scaled, base) if base else 1.0
        rows.append(
            {"alpha": alpha, "ratio": scaled, "change": change, "bound": scaling_bounds(F, alpha)}
        )
    return rows
