"""
Description: Minimization of a DirichletProblem from the zero field.
"""

import logging

import numpy as np

from fields.samples import plane_phase

from .energy import DiscreteEnergy
from .ncg import MAXITER, minimize
from .problems import SolveResult

logger = logging.getLogger(__name__)


def solve(problem, maxiter=MAXITER, energy=None):
    """
    Minimizes F over the unknowns of ``problem`` starting from u = 0.

    Returns:
        SolveResult

    Raises:
        LineSearchError: the line search failed; carries the last iterate.
        ConsistencyError: the energy increased along an accepted step.
    """
    energy = energy or DiscreteEnergy(problem)
    label = f"solve[{problem.describe()}]"
    x0 = np.zeros(energy.size, dtype=complex)
    minimum = minimize(energy, x0, energy.gradient_norm, maxiter=maxiter, label=label)
    suffix = "local" if problem.is_local else f"s={problem.s:g}"
    return SolveResult(
        minimizer=energy.field(minimum.x, label=f"u[{suffix}]"),
        energy=minimum.energy,
        gradient_norm=minimum.gradient_norm,
        iterations=minimum.iterations,
        converged=minimum.converged,
        reason=minimum.reason,
        history=minimum.history,
    )


def gauge_residual(base, shifted, c):
    """
    sup |shifted - e^{i c.x} base| / max(sup |base|, 1e-300) for two minimizers
    of gauge-related problems.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size == 1 and base.grid.n > 1:
        c = np.repeat(c, base.grid.n)
    expected = plane_phase(base, c)
    gap = np.max(np.abs(shifted.values - expected.values))
    return float(gap / max(base.sup_norm(), 1e-300))
