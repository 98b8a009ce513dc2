#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Description: Magnetic potentials A: constant, linear shear A(x) = c + M x, and
fields sampled on a grid. Every potential records a sup-norm and a Lipschitz
bound over the grid box.
"""

__version__ = "0.1.0"

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from orliczlab.exceptions import InputError

logger = logging.getLogger(__name__)

KINDS = ("constant", "shear", "sampled")


@dataclass(frozen=True, eq=False)
class MagneticPotential:
    """
    A(x) = offset + matrix @ x, or the multilinear interpolant of ``samples``
    (plus offset) on ``grid``.

    Use the ``constant``, ``shear`` and ``sampled`` constructors.
    """

    n: int
    offset: np.ndarray
    matrix: np.ndarray = None
    samples: np.ndarray = None
    grid: object = None
    sup_norm: float = field(default=0.0)
    lipschitz_bound: float = field(default=0.0)
    label: str = field(default="A")

    @property
    def kind(self):
        if self.samples is not None:
            return "sampled"
        if self.matrix is not None:
            return "shear"
        return "constant"

    @classmethod
    def zero(cls, n):
        return cls.constant(np.zeros(n), label="zero")

    @classmethod
    def constant(cls, c, label=None):
        c = _vector(c)
        return cls(
            n=c.size,
            offset=c,
            sup_norm=float(np.linalg.norm(c)),
            lipschitz_bound=0.0,
            label=label or "const:" + ",".join(f"{x:g}" for x in c),
        )

    @classmethod
    def shear(cls, matrix, grid, offset=None, label=None):
        """A(x) = offset + M x; bounds are taken over the box [-L, L]^n."""
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        n = grid.n
        if M.shape != (n, n) or not np.all(np.isfinite(M)):
            raise InputError(f"shear matrix must be a finite {n}x{n} array")
        c = np.zeros(n) if offset is None else _vector(offset)
        corners = np.array(np.meshgrid(*([[-grid.L, grid.L]] * n), indexing="ij"))
        corners = corners.reshape(n, -1).T
        # |c + M x| is convex, so its max over the box sits at a corner
        sup = float(np.max(np.linalg.norm(c + corners @ M.T, axis=-1)))
        return cls(
            n=n,
            offset=c,
            matrix=M,
            grid=grid,
            sup_norm=sup,
            lipschitz_bound=float(np.linalg.norm(M, 2)),
            label=label or "shear:" + ",".join(f"{x:g}" for x in M.ravel()),
        )

    @classmethod
    def sampled(cls, grid, values, label="sampled"):
        """
        Potential known at the grid nodes; ``values`` has shape
        ``grid.shape + (n,)`` or is a callable of the node coordinates.
        """
        if callable(values):
            values = values(grid.points())
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape + (grid.n,):
            raise InputError(
                f"sampled potential needs shape {grid.shape + (grid.n,)}, got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InputError("sampled potential must be finite")
        return cls(
            n=grid.n,
            offset=np.zeros(grid.n),
            samples=values,
            grid=grid,
            sup_norm=float(np.max(np.linalg.norm(values, axis=-1))),
            lipschitz_bound=_sampled_lipschitz(values, grid),
            label=label,
        )

    def __post_init__(self):
        if self.n not in (1, 2):
            raise InputError(f"potential dimension must be 1 or 2, got {self.n}")
        if self.samples is not None:
            axes = (self.grid.axis,) * self.n
            interp = RegularGridInterpolator(
                axes, self.samples, method="linear", bounds_error=False, fill_value=None
            )
            object.__setattr__(self, "_interp", interp)

    def is_zero(self):
        return self.kind == "constant" and not np.any(self.offset)

    def __call__(self, points):
        """A at ``points`` of shape (..., n); returns shape (..., n)."""
        points = np.asarray(points, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(self.offset, points.shape).copy()
        if self.kind == "shear":
            return self.offset + points @ self.matrix.T
        lo, hi = self.grid.axis[0], self.grid.axis[-1]
        clipped = np.clip(points, lo, hi)
        flat = clipped.reshape(-1, self.n)
        return (self._interp(flat) + self.offset).reshape(points.shape)

    def component(self, points, axis):
        return self(points)[..., axis]

    def link_phase(self, x, y):
        """theta = (x - y) . A((x + y) / 2), the midpoint phase of a pair."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        delta = x - y
        if self.kind == "constant":
            return delta @ self.offset
        return np.sum(delta * self(0.5 * (x + y)), axis=-1)

    def shifted(self, c):
        """A + c for a constant vector c."""
        c = _vector(c)
        if c.size != self.n:
            raise InputError(f"shift must have {self.n} component(s)")
        offset = self.offset + c
        if self.kind == "constant":
            return MagneticPotential.constant(offset)
        if self.kind == "shear":
            return MagneticPotential.shear(self.matrix, self.grid, offset=offset)
        return MagneticPotential.sampled(
            self.grid, self.samples + c, label=f"{self.label}+const"
        )

    def verify(self, grid):
        """
        Checks that the recorded bounds hold on the grid nodes.

        Returns:
            bool: True when sup |A| <= sup_norm and the axis difference
            quotients are <= lipschitz_bound (up to rounding).
        """
        values = self(grid.points())
        slack = 1e-12 * (1.0 + self.sup_norm)
        if np.max(np.linalg.norm(values, axis=-1)) > self.sup_norm + slack:
            return False
        for axis in range(grid.n):
            diff = np.diff(values, axis=axis)
            quotient = np.max(np.linalg.norm(diff, axis=-1)) / grid.h
            if quotient > self.lipschitz_bound * (1 + 1e-12) + slack:
                return False
        return True

    def as_dict(self):
        return {
            "kind": self.kind,
            "label": self.label,
            "sup_norm": self.sup_norm,
            "lipschitz_bound": self.lipschitz_bound,
        }

    def __str__(self):
        return self.label


def _vector(c):
    c = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
    if not np.all(np.isfinite(c)):
        raise InputError(f"potential components must be finite, got {c}")
    return c


def _sampled_lipschitz(values, grid):
    bound = 0.0
    for axis in range(grid.n):
        diff = np.diff(values, axis=axis)
        if diff.size:
            bound = max(bound, float(np.max(np.linalg.norm(diff, axis=-1))) / grid.h)
    return bound * math.sqrt(grid.n)


def parse_potential(spec, grid):
    """
    Builds a potential from a config string:

        zero | const:c[,c2] | shear:m (1D) | shear:m11,m12,m21,m22 (2D)
        | wave:amplitude,k  (sampled A_d(x) = amplitude * sin(k x_d))

    Raises:
        InputError: unknown kind or malformed components.
    """
    if isinstance(spec, MagneticPotential):
        return spec
    text = str(spec).strip()
    kind, _, rest = text.partition(":")
    kind = kind.lower()
    try:
        numbers = [float(x) for x in rest.split(",")] if rest else []
    except ValueError as e:
        raise InputError(f"Invalid potential {spec!r}: {e}")

    if kind == "zero":
        return MagneticPotential.zero(grid.n)
    if kind == "const":
        if len(numbers) == 1:
            numbers = numbers * grid.n
        if len(numbers) != grid.n:
            raise InputError(f"const potential needs {grid.n} component(s)")
        return MagneticPotential.constant(numbers, label=text)
    if kind == "shear":
        if len(numbers) != grid.n**2:
            raise InputError(f"shear potential needs {grid.n**2} entries")
        return MagneticPotential.shear(
            np.reshape(numbers, (grid.n, grid.n)), grid, label=text
        )
    if kind == "wave":
        if len(numbers) != 2:
            raise InputError("wave potential needs amplitude,k")
        amplitude, k = numbers
        return MagneticPotential.sampled(
            grid, lambda x: amplitude * np.sin(k * x), label=text
        )
    raise InputError(
        f"Unknown potential {spec!r}; expected zero, const, shear or wave"
    )
