"""
Description: Dirichlet problems for the functionals

    F_s(u)  = (1 - s) I_{s,G}^A(u) - integral Re(f conj u)     (fractional)
    F_1(u)  = I_Phi^A(u) - integral Re(f conj u)               (local)

over the grid values inside Omega. Outside Omega the unknowns are zero: the
fractional problem works in the zero-extension space, the local one with a
zero trace.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from fields.grid import GridField
from modulars.config import QuadratureConfig
from modulars.quotient import check_order
from orliczlab.exceptions import DegenerateFunctionError, InputError

logger = logging.getLogger(__name__)

LOCAL = "local"


@dataclass(frozen=True, eq=False)
class DirichletProblem:
    """
    Args:
        orlicz: the Orlicz function G.
        A: magnetic potential.
        f: source field, supported in Omega.
        domain: the box Omega.
        s: order in (0, 1), or "local".
        use_limit: local problem only; minimize with Phi = G~ instead of G.
        cfg: QuadratureConfig of the fractional energy.
    """

    orlicz: object
    A: object
    f: GridField
    domain: object
    s: object = LOCAL
    use_limit: bool = False
    cfg: QuadratureConfig = field(default=None)

    def __post_init__(self):
        if self.s != LOCAL:
            object.__setattr__(self, "s", check_order(self.s))
        if self.use_limit and self.s != LOCAL:
            raise InputError("use_limit applies to the local problem only")
        if not self.orlicz.p_minus > 1.0:
            raise DegenerateFunctionError(
                f"{self.orlicz.name}: p_minus = {self.orlicz.p_minus} <= 1, the energy is "
                "not uniformly convex"
            )
        if self.f.grid.n != self.domain.n:
            raise InputError(f"source has dimension {self.f.grid.n}, domain {self.domain.n}")
        if not self.domain.contains_support(self.f):
            raise InputError(f"source {self.f.label} is not supported in the domain")
        if self.cfg is None:
            object.__setattr__(self, "cfg", QuadratureConfig.from_settings())

    @property
    def grid(self):
        return self.f.grid

    @property
    def is_local(self):
        return self.s == LOCAL

    @property
    def mask(self):
        """Nodes carrying unknowns."""
        return self.domain.interior_mask(self.grid)

    def box(self, margin):
        """Index box of the unknowns widened by ``margin`` nodes."""
        nonzero = np.nonzero(self.mask)
        N = self.grid.N
        return tuple(
            (max(int(ix.min()) - margin, 0), min(int(ix.max()) + margin, N - 1))
            for ix in nonzero
        )

    def with_order(self, s):
        return DirichletProblem(self.orlicz, self.A, self.f, self.domain, s, False, self.cfg)

    def local_problem(self, use_limit=True):
        return DirichletProblem(
            self.orlicz, self.A, self.f, self.domain, LOCAL, use_limit, self.cfg
        )

    def describe(self):
        kind = "local" if self.is_local else f"s={self.s}"
        phi = "G~" if self.use_limit else self.orlicz.name
        return f"{kind}, Phi={phi}, A={self.A}, f={self.f.label}"


@dataclass
class SolveResult:
    minimizer: GridField
    energy: float
    gradient_norm: float
    iterations: int
    converged: bool
    reason: str = ""
    history: list = field(default_factory=list, repr=False)

    def as_dict(self):
        return {
            "energy": self.energy,
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "reason": self.reason,
        }
