"""
Description: The magnetic BBM limit

    (1 - s) I_{s,G}^A(u)  ->  I_{G~}^A(u)   as s -> 1,

checked on a ladder of orders by extrapolating affinely in (1 - s), globally
and at a single point x.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from modulars.config import QuadratureConfig
from modulars.fractional import FractionalQuadrature, active_box, modular_IsGA
from modulars.local import covariant_gradient, modular_IG, modular_IGA_local
from modulars.quotient import check_order
from orlicz.spherical import SphericalLimit
from orliczlab.exceptions import InputError, NumericError

logger = logging.getLogger(__name__)

DEFAULT_LADDER = (0.60, 0.70, 0.80, 0.875, 0.925, 0.95)
LADDER_BOUNDS = (0.5, 0.97)
EXTRAPOLATION_POINTS = 3
GAP_FLOOR = 1e-30


def check_ladder(s_ladder, bounds=LADDER_BOUNDS):
    """
    Raises:
        InputError: fewer than three orders, not strictly increasing or
        outside ``bounds``.
    """
    ladder = [float(s) for s in s_ladder]
    if len(ladder) < EXTRAPOLATION_POINTS:
        raise InputError(f"the s ladder needs at least {EXTRAPOLATION_POINTS} orders, got {ladder}")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise InputError(f"the s ladder must be strictly increasing, got {ladder}")
    lo, hi = bounds
    if ladder[0] < lo or ladder[-1] > hi:
        raise InputError(f"the s ladder must lie in [{lo}, {hi}], got {ladder}")
    for s in ladder:
        check_order(s)
    return ladder


def extrapolate(s_ladder, values, points=EXTRAPOLATION_POINTS):
    """Value at s = 1 of the affine fit in (1 - s) through the last ``points`` entries."""
    s = np.asarray(s_ladder[-points:], dtype=float)
    v = np.asarray(values[-points:], dtype=float)
    slope, intercept = np.polyfit(1.0 - s, v, 1)
    return float(intercept)


def relative_gap(value, target):
    return abs(value - target) / max(abs(target), GAP_FLOOR)


def limit_orlicz(F, n):
    """G~ of F in dimension n as an Orlicz function usable by the local modulars."""
    return SphericalLimit(F, n).as_orlicz()


@dataclass
class SweepResult:
    s_ladder: list
    scaled_values: list
    target: float
    extrapolated: float
    rel_gap: float
    error_estimates: list = field(default_factory=list)
    bound_ratio: float = 0.0

    def as_rows(self):
        """CSV rows: s, scaled_value, target, gap."""
        return [
            {
                "s": s,
                "scaled_value": repr(v),
                "target": repr(self.target),
                "gap": repr(relative_gap(v, self.target)),
            }
            for s, v in zip(self.s_ladder, self.scaled_values)
        ]

    def as_dict(self):
        return {
            "s_ladder": self.s_ladder,
            "scaled_values": self.scaled_values,
            "target": self.target,
            "extrapolated": self.extrapolated,
            "rel_gap": self.rel_gap,
            "error_estimates": self.error_estimates,
            "bound_ratio": self.bound_ratio,
        }


def ladder_map(func, ladder, workers=1):
    """Evaluates func(s) over the ladder in order, concurrently when workers > 1."""
    workers = int(workers)
    if workers > 1 and len(ladder) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(ladder))) as pool:
            return list(pool.map(func, ladder))
    return [func(s) for s in ladder]


def scaled_ladder(F, u, A, s_ladder, cfg=None, ladder_workers=1):
    """
    (1 - s) I_{s,G}^A(u) over the ladder with the matching error estimates.

    Raises:
        NumericError: a modular evaluated to a non-finite value.
    """
    cfg = cfg or QuadratureConfig.from_settings()

    def evaluate(s):
        report = modular_IsGA(F, u, A, s, cfg)
        if not math.isfinite(report.value):
            raise NumericError(f"I_s({u.label}) at s={s} is not finite: {report.value}")
        return (1.0 - s) * report.value, (1.0 - s) * report.error_estimate

    results = ladder_map(evaluate, list(s_ladder), ladder_workers)
    return [v for v, _ in results], [e for _, e in results]


def bbm_target(F, u, A, tilde_F=None):
    """I_{G~}^A(u) by the local modular with G~ tabulated from F."""
    if u.is_zero():
        return 0.0
    return modular_IGA_local(tilde_F or limit_orlicz(F, u.grid.n), u, A).value


def _bound_ratio(F, u, A, ladder, scaled):
    """
    max over the ladder of (1 - s) I_s / [(1/s + 1/(1 - s)) (1 - s) I_G(u) + I_G^A(u)].
    """
    if u.is_zero():
        return 0.0
    plain = modular_IG(F, u).value
    magnetic = modular_IGA_local(F, u, A).value
    ratios = [
        v / ((1.0 / s + 1.0 / (1.0 - s)) * (1.0 - s) * plain + magnetic)
        for s, v in zip(ladder, scaled)
    ]
    return max(ratios)


def bbm_sweep(F, u, A, s_ladder=DEFAULT_LADDER, cfg=None):
    """
    Sweeps (1 - s) I_{s,G}^A(u) over the ladder, extrapolates to s = 1 and
    compares with I_{G~}^A(u).

    Raises:
        InputError: bad ladder.
        NumericError: a non-finite modular.
    """
    ladder = check_ladder(s_ladder)
    cfg = cfg or QuadratureConfig.from_settings()
    # the ladder takes the threads; pair blocks run serially inside
    scaled, errors = scaled_ladder(
        F, u, A, ladder, cfg.with_options(workers=1), ladder_workers=cfg.workers
    )
    target = bbm_target(F, u, A)
    extrapolated = extrapolate(ladder, scaled)
    result = SweepResult(
        s_ladder=ladder,
        scaled_values=scaled,
        target=target,
        extrapolated=extrapolated,
        rel_gap=relative_gap(extrapolated, target),
        error_estimates=errors,
        bound_ratio=_bound_ratio(F, u, A, ladder, scaled),
    )
    logger.info(
        f"BBM sweep {F.name} on {u.label}: extrapolated {extrapolated:.6g}, "
        f"target {target:.6g}, gap {result.rel_gap:.3%}"
    )
    return result



@dataclass
class PointwiseResult:
    point: tuple
    s_ladder: list
    re_values: list
    im_values: list
    re_limit: float
    im_limit: float
    re_target: float
    im_target: float

    @property
    def limits(self):
        return self.re_limit, self.im_limit

    def as_rows(self):
        """CSV rows: s, re_value, im_value, re_target, im_target."""
        return [
            {
                "s": s,
                "re_value": repr(re),
                "im_value": repr(im),
                "re_target": repr(self.re_target),
                "im_target": repr(self.im_target),
            }
            for s, re, im in zip(self.s_ladder, self.re_values, self.im_values)
        ]


def pointwise_targets(F, u, A, tilde_F=None):
    """
    G~(|Re(grad u - i A u)|) and G~(|Im(grad u - i A u)|) at every node, by
    covariant central differences.
    """
    tilde_F = tilde_F or limit_orlicz(F, u.grid.n)
    V = covariant_gradient(u, A)
    re = tilde_F.G(np.linalg.norm(V.real, axis=-1))
    im = tilde_F.G(np.linalg.norm(V.imag, axis=-1))
    return re, im


def _box_with(box, index, margin, N):
    return tuple(
        (min(lo, max(i - margin, 0)), max(hi, min(i + margin, N - 1)))
        for (lo, hi), i in zip(box, index)
    )


def pointwise_bbm(F, u, A, x, s_ladder=DEFAULT_LADDER, cfg=None):
    """
    Extrapolates (1 - s) times the x-rows of the split modular,

        integral G(|Re D_s^A u(x, y)|) dy / |x - y|^n   (and Im),

    to s = 1 and pairs them with their targets G~(|Re V(x)|), G~(|Im V(x)|).

    Raises:
        InputError: x is not a grid node, or a bad ladder.
    """
    ladder = check_ladder(s_ladder)
    cfg = cfg or QuadratureConfig.from_settings()
    grid = u.grid
    index = grid.index_of(x)
    margin = int(cfg.near_cells) + 1
    box = _box_with(active_box(u, cfg), index, margin, grid.N)
    inner = cfg.with_options(workers=1)

    def rows(s):
        quadrature = FractionalQuadrature(grid, A, s, box, inner)
        local = tuple(i - lo for i, (lo, _) in zip(index, box))
        row = int(np.ravel_multi_index(local, quadrature.shape))
        re, im = quadrature.row_integrals(F, quadrature.restrict(u.values), row)
        return (1.0 - s) * re, (1.0 - s) * im

    values = ladder_map(rows, ladder, cfg.workers)
    re_values = [re for re, _ in values]
    im_values = [im for _, im in values]
    re_target, im_target = pointwise_targets(F, u, A)
    result = PointwiseResult(
        point=tuple(float(c) for c in np.atleast_1d(x)),
        s_ladder=ladder,
        re_values=re_values,
        im_values=im_values,
        re_limit=extrapolate(ladder, re_values),
        im_limit=extrapolate(ladder, im_values),
        re_target=float(re_target[index]),
        im_target=float(im_target[index]),
    )
    logger.info(
        f"Pointwise BBM at x={result.point}: limits ({result.re_limit:.6g}, "
        f"{result.im_limit:.6g}), targets ({result.re_target:.6g}, {result.im_target:.6g})"
    )
    return result


def pointwise_consistency(F, u, A):
    """
    Returns (grid integral of the pointwise targets, I_{G~}^A(u), relative gap).
    """
    tilde_F = limit_orlicz(F, u.grid.n)
    re, im = pointwise_targets(F, u, A, tilde_F)
    integral = u.grid.cell_volume * float(np.sum(re + im))
    target = bbm_target(F, u, A, tilde_F)
    return integral, target, relative_gap(integral, target)


def refinement_check(F, build, grid, s_ladder=DEFAULT_LADDER, cfg=None):
    """
    BBM gaps at N and 2N. ``build(grid)`` returns the (u, A) pair sampled on
    a grid.

    Returns:
        tuple: (SweepResult at N, SweepResult at 2N).
    """
    coarse = bbm_sweep(F, *build(grid), s_ladder, cfg)
    fine_grid = type(grid)(grid.n, grid.L, 2 * grid.N)
    fine = bbm_sweep(F, *build(fine_grid), s_ladder, cfg)
    logger.info(f"Refinement N={grid.N}: gap {coarse.rel_gap:.3%} -> {fine.rel_gap:.3%}")
    return coarse, fine


def divergence_smoke(F, build, grid, s_ladder=DEFAULT_LADDER, cfg=None):
    """
    Scaled values of a field outside W^{1,G}_A (a jump) at N and 2N. On a
    fixed grid they stay finite; the growth factors fine / coarse per order
    are reported without a quantitative claim.
    """
    ladder = check_ladder(s_ladder)
    cfg = cfg or QuadratureConfig.from_settings()
    inner = cfg.with_options(workers=1)
    fine_grid = type(grid)(grid.n, grid.L, 2 * grid.N)
    coarse, _ = scaled_ladder(F, *build(grid), ladder, inner, cfg.workers)
    fine, _ = scaled_ladder(F, *build(fine_grid), ladder, inner, cfg.workers)
    growth = [f / c if c > 0 else math.inf for c, f in zip(coarse, fine)]
    growing = all(g > 1.0 for g in growth)
    if not growing:
        logger.warning(f"Scaled values do not grow under refinement: {growth}")
    return {
        "s_ladder": ladder,
        "coarse": coarse,
        "fine": fine,
        "growth": growth,
        "growing": growing,
    }
