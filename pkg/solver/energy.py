"""
Description: Discrete energies of Dirichlet problems and their gradients with
respect to the unknowns. Gradients are returned as dE/dRe u + i dE/dIm u.
"""

import logging

import numpy as np

from limits.bbm import limit_orlicz
from modulars.fractional import FractionalQuadrature
from modulars.local import LocalStencil
from orliczlab.exceptions import InputError

logger = logging.getLogger(__name__)


class DiscreteEnergy:
    """
    F_s or F_1 of a DirichletProblem as a function of the unknown vector.

    The unknowns live on the nodes of ``problem.mask``; the energy is
    assembled on their index box widened by a ring of zero nodes.
    """

    def __init__(self, problem):
        self.problem = problem
        grid = problem.grid
        self.grid = grid
        self.volume = grid.cell_volume
        self.mask = problem.mask
        self.size = int(self.mask.sum())
        if self.size == 0:
            raise InputError(f"the domain {problem.domain.as_dict()} holds no grid nodes")

        if problem.is_local:
            self.box = problem.box(1)
            self.phi = limit_orlicz(problem.orlicz, grid.n) if problem.use_limit else problem.orlicz
            self.stencil = LocalStencil(grid, problem.A, self.box)
            self.quadrature = None
        else:
            self.box = problem.box(int(problem.cfg.near_cells) + 1)
            self.phi = problem.orlicz
            self.stencil = None
        box_index = tuple(slice(lo, hi + 1) for lo, hi in self.box)
        self.box_shape = tuple(hi - lo + 1 for lo, hi in self.box)
        self.dof_positions = np.flatnonzero(self.mask[box_index])
        if not problem.is_local:
            self.quadrature = FractionalQuadrature(
                grid,
                problem.A,
                problem.s,
                self.box,
                problem.cfg,
                candidates=self.dof_positions,
                cache=True,
            )
        self.f = problem.f.values[self.mask]
        logger.debug(
            f"Energy for {problem.describe()}: {self.size} unknowns on box {self.box}"
        )

    # unknowns <-> fields

    def unknowns(self, u):
        """
        Raises:
            InputError: u is nonzero outside Omega or lives on another grid.
        """
        if u.grid != self.grid:
            raise InputError(f"{u.label} lives on {u.grid}, the problem on {self.grid}")
        if np.any(u.values[~self.mask]):
            raise InputError(f"{u.label} does not vanish outside the domain")
        return u.values[self.mask].astype(complex)

    def field(self, x, label="u"):
        values = np.zeros(self.grid.shape, dtype=complex)
        values[self.mask] = x
        radius = float(np.max(self.grid.radius()[self.mask]))
        return self.problem.f.with_values(values, support_radius=radius, label=label)

    def _box_values(self, x):
        values = np.zeros(int(np.prod(self.box_shape)), dtype=complex)
        values[self.dof_positions] = x
        return values

    # energy

    def __call__(self, x, want_grad=True):
        """Returns (E, dE) for the unknown vector x; dE is None without want_grad."""
        x = np.asarray(x, dtype=complex)
        U = self._box_values(x)
        if self.stencil is not None:
            if want_grad:
                value, grad = self.stencil.energy_and_gradient(self.phi, U)
            else:
                value, grad = self.stencil.energy(self.phi, U), None
        else:
            scale = 1.0 - self.problem.s
            value, grad, _, _ = self.quadrature.evaluate(self.phi, U, want_grad=want_grad)
            value *= scale
            if want_grad:
                grad = scale * grad
        source = self.volume * float(np.sum((self.f * np.conj(x)).real))
        energy = value - source
        if not want_grad:
            return energy, None
        return energy, grad[self.dof_positions] - self.volume * self.f

    def gradient_norm(self, grad):
        """Discrete L^2 norm of the gradient density, ||dE|| / h^{n/2}."""
        return float(np.linalg.norm(grad)) / np.sqrt(self.volume)


def energy_and_gradient(problem, u, energy=None):
    """
    (F(u), dF(u)) with dF over the unknowns of the problem.

    Raises:
        InputError: u violates the zero-extension constraint.
    """
    energy = energy or DiscreteEnergy(problem)
    return energy(energy.unknowns(u))
