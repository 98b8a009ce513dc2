"""
Description: Polak-Ribiere+ nonlinear conjugate gradients with an Armijo
backtracking line search, for convex energies of complex unknowns. Complex
vectors are treated as real ones through Re <a, b>.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from orliczlab.exceptions import ConsistencyError, LineSearchError, NumericError

logger = logging.getLogger(__name__)

MAXITER = 20000
STAGNATION_TOLERANCE = 1e-12
"""Stop when the relative energy decrease of a step falls below this."""
GRADIENT_TOLERANCE = 1e-8
"""Stop when gradient_norm < GRADIENT_TOLERANCE (1 + |E|)."""
ARMIJO = 1e-4
WOLFE = 0.9
ENERGY_SLACK = 1e-12
"""Relative energy noise tolerated by the approximate Wolfe test."""
BACKTRACKS = 60


def real_dot(a, b):
    return float(np.vdot(a, b).real)


@dataclass
class Minimum:
    x: np.ndarray
    energy: float
    gradient: np.ndarray
    gradient_norm: float
    iterations: int
    reason: str
    history: list = field(default_factory=list)

    @property
    def converged(self):
        return self.reason in ("gradient", "stagnation")


def _accepts(E, slope, alpha, E_new, g_new, d):
    """Armijo, or the approximate Wolfe test once energy differences reach rounding level."""
    if not math.isfinite(E_new):
        return False
    if E_new <= E + ARMIJO * alpha * slope:
        return True
    flat = E_new <= E + ENERGY_SLACK * abs(E)
    return flat and (1.0 - 2.0 * ARMIJO) * abs(slope) >= real_dot(g_new, d) >= WOLFE * slope


def _line_search(energy, x, E, d, slope, trial):
    """
    Backtracking along d, starting from the secant minimizer built from the
    directional derivatives at 0 and at ``trial``.

    Raises:
        LineSearchError: no step is accepted.
    """
    E_trial, g_trial = energy(x + trial * d)
    slope_trial = real_dot(g_trial, d)
    if math.isfinite(slope_trial) and slope_trial > slope:
        alpha = -slope * trial / (slope_trial - slope)
    else:
        alpha = trial
    if alpha == trial:
        E_new, g_new = E_trial, g_trial
    else:
        E_new, g_new = energy(x + alpha * d)
    for _ in range(BACKTRACKS):
        if _accepts(E, slope, alpha, E_new, g_new, d):
            return alpha, E_new, g_new
        alpha *= 0.5
        E_new, g_new = energy(x + alpha * d)
    raise LineSearchError(
        f"no acceptable step along the search direction (last alpha {alpha:.3e}, E={E!r})",
        last_iterate=x,
    )


def minimize(energy, x0, norm, maxiter=MAXITER, label="energy"):
    """
    Minimizes ``energy(x) -> (E, dE)`` from x0.

    Args:
        energy: callable returning the energy and its gradient.
        x0: initial complex vector.
        norm: callable giving the gradient norm used by the stop rule.
        maxiter: iteration limit.

    Returns:
        Minimum: with reason "gradient", "stagnation" or "maxiter".

    Raises:
        LineSearchError: the line search failed; carries the last iterate.
        ConsistencyError: an accepted step increased the energy.
        NumericError: the energy is not finite at x0.
    """
    x = np.array(x0, dtype=complex)
    E, g = energy(x)
    if not math.isfinite(E):
        raise NumericError(f"{label}: energy is not finite at the initial iterate", last_iterate=x)
    history = [E]
    d = -g
    step = None
    reason = "maxiter"
    iterations = 0

    for k in range(1, maxiter + 1):
        gnorm = norm(g)
        if gnorm < GRADIENT_TOLERANCE * (1.0 + abs(E)):
            reason = "gradient"
            break
        slope = real_dot(g, d)
        if slope >= 0.0:
            # not a descent direction: restart along -g
            d = -g
            slope = -real_dot(g, g)
        if step is None:
            trial = 1.0 / max(float(np.linalg.norm(d)), 1e-300)
        else:
            trial = step
        alpha, E_new, g_new = _line_search(energy, x, E, d, slope, trial)
        if E_new > E + ENERGY_SLACK * abs(E):
            raise ConsistencyError(
                f"{label}: energy increased from {E!r} to {E_new!r} at iteration {k}"
            )
        x = x + alpha * d
        decrease = (E - E_new) / max(abs(E_new), abs(E), 1e-300)
        beta = max(0.0, real_dot(g_new, g_new - g) / max(real_dot(g, g), 1e-300))
        d = -g_new + beta * d
        g = g_new
        E = E_new
        step = alpha
        history.append(E)
        iterations = k
        logger.debug(f"{label} it={k} E={E!r} |g|={norm(g):.3e} alpha={alpha:.3e} beta={beta:.3f}")
        if decrease < STAGNATION_TOLERANCE:
            reason = "stagnation"
            break

    result = Minimum(
        x=x,
        energy=E,
        gradient=g,
        gradient_norm=norm(g),
        iterations=iterations,
        reason=reason,
        history=history,
    )
    if result.converged:
        logger.info(f"{label}: E={E!r} after {iterations} iterations ({reason})")
    else:
        logger.warning(f"{label}: no convergence after {iterations} iterations, E={E!r}")
    return result
