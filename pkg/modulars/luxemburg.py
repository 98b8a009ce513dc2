"""
Description: Dispatch of modular kinds and the Luxemburg norms they induce,

    ||u|| = inf {lambda > 0 : modular(u / lambda) <= 1}.
"""

import logging
import math

from scipy import optimize

from fields.potentials import MagneticPotential
from orliczlab.exceptions import InputError, NumericError

from .config import FRACTIONAL_KINDS, ModularReport, QuadratureConfig, check_kind
from .fractional import FractionalQuadrature, active_box, modular_IsGA
from .local import check_stencil, local_stencil, modular_IG, modular_IGA_local
from .quotient import check_order

logger = logging.getLogger(__name__)

LUXEMBURG_TOLERANCE = 1e-10
"""Relative tolerance on lambda."""

BRACKET_STEPS = 60


def _potential(kind, u, A):
    if kind.endswith("GA") and A is not None:
        return A
    return MagneticPotential.zero(u.grid.n)


def evaluate_modular(kind, F, u, A=None, s=None, cfg=None):
    """
    Evaluates the modular ``kind`` (see ``config.KINDS``) of u.

    Raises:
        InputError: unknown kind, or a fractional kind without s.
        DomainError: s is not in (0, 1).
    """
    kind = check_kind(kind)
    tilde = kind.startswith("tilde_")
    A = _potential(kind, u, A)
    if kind in ("IG", "tilde_IG"):
        return modular_IG(F, u, tilde=tilde)
    if kind in ("IGA", "tilde_IGA"):
        report = modular_IGA_local(F, u, A, tilde=tilde)
        return ModularReport(kind=kind, value=report.value)
    if s is None:
        raise InputError(f"{kind} needs an order s")
    report = modular_IsGA(F, u, A, s, cfg, tilde=tilde)
    return ModularReport(
        kind=kind,
        value=report.value,
        s=report.s,
        shell_policy=report.shell_policy,
        error_estimate=report.error_estimate,
        parts=report.parts,
    )


def modular_function(kind, F, u, A=None, s=None, cfg=None):
    """
    Returns lambda -> modular(u / lambda), reusing the discretization across
    calls.
    """
    kind = check_kind(kind)
    tilde = kind.startswith("tilde_")
    A = _potential(kind, u, A)
    if kind in ("IG", "tilde_IG"):
        return lambda lam: modular_IG(F, u.with_values(u.values / lam), tilde=tilde).value
    if kind in ("IGA", "tilde_IGA"):
        check_stencil(u)
        stencil = local_stencil(u.grid, A)
        return lambda lam: stencil.energy(F, u.values / lam, tilde=tilde)
    if s is None:
        raise InputError(f"{kind} needs an order s")
    s = check_order(s)
    cfg = cfg or QuadratureConfig.from_settings()
    quadrature = FractionalQuadrature(u.grid, A, s, active_box(u, cfg), cfg, tilde=tilde)
    U = quadrature.restrict(u.values)
    return lambda lam: quadrature.evaluate(F, U / lam)[0]


def luxemburg_from_function(modular, label="u"):
    """
    Solves modular(lambda) = 1 for the nonincreasing function ``modular`` by
    bisection in log lambda.

    Raises:
        NumericError: no bracket was found; carries the searched interval.
    """

    def residual(log_lam):
        return modular(math.exp(log_lam)) - 1.0

    lo = hi = 0.0
    if residual(0.0) > 0.0:
        for _ in range(BRACKET_STEPS):
            hi += math.log(10.0)
            if residual(hi) <= 0.0:
                break
        else:
            raise NumericError(
                f"{label}: modular stays above 1 up to lambda = {math.exp(hi):g}",
                interval=(1.0, math.exp(hi)),
            )
        lo = hi - math.log(10.0)
    else:
        for _ in range(BRACKET_STEPS):
            lo -= math.log(10.0)
            if residual(lo) > 0.0:
                break
        else:
            raise NumericError(
                f"{label}: modular stays below 1 down to lambda = {math.exp(lo):g}",
                interval=(math.exp(lo), 1.0),
            )
        hi = lo + math.log(10.0)

    log_lam = optimize.bisect(residual, lo, hi, xtol=LUXEMBURG_TOLERANCE, maxiter=200)
    return math.exp(log_lam)


def luxemburg_norm(F, u, kind="IG", s=None, A=None, cfg=None):
    """
    inf {lambda > 0 : modular(u / lambda) <= 1}; 0 for the zero field.

    Raises:
        NumericError: the bracket search failed.
    """
    if u.is_zero():
        return 0.0
    if kind in FRACTIONAL_KINDS and s is None:
        raise InputError(f"{kind} needs an order s")
    modular = modular_function(kind, F, u, A, s, cfg)
    value = luxemburg_from_function(modular, label=u.label)
    logger.debug(f"||{u.label}||_{kind} = {value!r}")
    return value


def luxemburg_distance(F, u, v, kind="IG", s=None, A=None, cfg=None):
    """||u - v|| for fields on the same grid."""
    return luxemburg_norm(F, u - v, kind, s, A, cfg)

