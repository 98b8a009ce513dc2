#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Description: Uniform box grids, compactly supported complex fields on them,
and axis-aligned domains.

Nodes along each axis are x_i = -L + i h, i = 0..N-1, h = 2L/N, so the origin
is a node and the grid box of cells is [-L - h/2, L - h/2]^n.
"""

__version__ = "0.1.0"

import math
from dataclasses import dataclass, field

import numpy as np

from orliczlab.exceptions import DomainError, InputError

SUPPORT_TOLERANCE = 1e-12
"""Relative slack when testing whether a node lies outside a support ball."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid with N points per axis on [-L, L)^n."""

    n: int
    L: float
    N: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise InputError(f"grid dimension must be 1 or 2, got {self.n}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise InputError(f"half width must be positive, got {self.L}")
        if self.N < 8 or self.N % 2:
            raise InputError(f"points per axis must be even and >= 8, got {self.N}")

    @property
    def h(self):
        return 2.0 * self.L / self.N

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def size(self):
        return self.N**self.n

    @property
    def cell_volume(self):
        return self.h**self.n

    @property
    def axis(self):
        return -self.L + self.h * np.arange(self.N)

    def coordinates(self):
        """Tuple of coordinate arrays, each of shape ``self.shape``."""
        return np.meshgrid(*([self.axis] * self.n), indexing="ij")

    def points(self):
        """Array of shape ``self.shape + (n,)`` holding the node coordinates."""
        return np.stack(self.coordinates(), axis=-1)

    def radius(self):
        """|x| at every node."""
        return np.linalg.norm(self.points(), axis=-1)

    def index_of(self, point):
        """
        Multi-index of the node at ``point``.

        Raises:
            InputError: the point is outside the grid or not a node.
        """
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.n,):
            raise InputError(f"expected a point with {self.n} coordinate(s), got {point}")
        index = (point + self.L) / self.h
        rounded = np.rint(index)
        if np.any(rounded < 0) or np.any(rounded > self.N - 1):
            raise InputError(f"point {point.tolist()} lies outside the grid")
        if np.any(np.abs(index - rounded) > 1e-6):
            raise InputError(f"point {point.tolist()} is not a grid node")
        return tuple(int(i) for i in rounded)

    def as_dict(self):
        return {"n": self.n, "L": self.L, "N": self.N}


@dataclass(frozen=True, eq=False)
class GridField:
    """
    Complex samples of u on a grid, vanishing outside the ball of radius
    ``support_radius`` (the zero extension to R^n).
    """

    grid: Grid
    values: np.ndarray
    support_radius: float
    label: str = field(default="field")

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise InputError(
                f"field shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InputError(f"{self.label}: values must be finite")
        if not (0.0 <= self.support_radius <= self.grid.L * math.sqrt(self.grid.n)):
            raise InputError(
                f"{self.label}: support radius {self.support_radius} exceeds the grid"
            )
        outside = self.grid.radius() > self.support_radius * (1 + SUPPORT_TOLERANCE) + 1e-15
        if np.any(values[outside] != 0):
            raise InputError(
                f"{self.label}: nonzero values outside the support radius {self.support_radius}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def real(self):
        return self.values.real

    @property
    def imag(self):
        return self.values.imag

    def is_zero(self):
        return not np.any(self.values)

    def is_real(self):
        return not np.any(self.values.imag)

    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def at(self, point):
        return complex(self.values[self.grid.index_of(point)])

    def with_values(self, values, support_radius=None, label=None):
        return GridField(
            self.grid,
            values,
            self.support_radius if support_radius is None else support_radius,
            self.label if label is None else label,
        )

    def scaled(self, factor):
        return self.with_values(factor * self.values, label=f"{factor:g}*{self.label}")

    def __add__(self, other):
        return self.with_values(
            self.values + other.values,
            support_radius=max(self.support_radius, other.support_radius),
            label=f"({self.label}+{other.label})",
        )

    def __sub__(self, other):
        return self.with_values(
            self.values - other.values,
            support_radius=max(self.support_radius, other.support_radius),
            label=f"({self.label}-{other.label})",
        )

    def support_box(self, margin=0):
        """
        Index ranges (lo, hi) per axis of the nodes that can carry nonzero
        values, widened by ``margin`` nodes and clipped to the grid.
        """
        nonzero = np.nonzero(self.values)
        box = []
        for axis in range(self.grid.n):
            if nonzero[axis].size:
                lo, hi = int(nonzero[axis].min()), int(nonzero[axis].max())
            else:
                lo = hi = self.grid.N // 2
            box.append((max(lo - margin, 0), min(hi + margin, self.grid.N - 1)))
        return tuple(box)


@dataclass(frozen=True)
class Domain:
    """Axis-aligned open box Omega = prod (lower_d, upper_d)."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(x) for x in np.atleast_1d(self.lower))
        upper = tuple(float(x) for x in np.atleast_1d(self.upper))
        if len(lower) != len(upper) or len(lower) not in (1, 2):
            raise InputError("domain bounds must have 1 or 2 coordinates")
        if any(not (a < b) for a, b in zip(lower, upper)):
            raise DomainError(f"empty domain {lower} x {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self):
        return len(self.lower)

    @property
    def diameter(self):
        return math.hypot(*(b - a for a, b in zip(self.lower, self.upper)))

    def interior_mask(self, grid):
        """Nodes strictly inside Omega."""
        self.check_inside(grid)
        mask = np.ones(grid.shape, dtype=bool)
        for x, a, b in zip(grid.coordinates(), self.lower, self.upper):
            mask &= (x > a + 1e-12 * grid.h) & (x < b - 1e-12 * grid.h)
        return mask

    def check_inside(self, grid):
        """
        Raises:
            DomainError: Omega does not lie strictly inside the grid with a
            ring of exterior nodes around it.
        """
        if grid.n != self.n:
            raise DomainError(f"domain has dimension {self.n}, grid {grid.n}")
        low_edge = -grid.L + grid.h
        high_edge = grid.L - 2 * grid.h
        for a, b in zip(self.lower, self.upper):
            if a < low_edge or b > high_edge:
                raise DomainError(
                    f"domain ({a}, {b}) is not strictly inside the grid [{-grid.L}, {grid.L})"
                )

    def contains_support(self, u):
        """True when u vanishes at every node outside the open box."""
        return not np.any(u.values[~self.interior_mask(u.grid)])

    def restrict(self, u):
        """u times the indicator of the open box."""
        mask = self.interior_mask(u.grid)
        values = np.where(mask, u.values, 0.0)
        radius = float(np.max(u.grid.radius()[mask])) if mask.any() else 0.0
        return u.with_values(
            values, support_radius=min(radius, u.support_radius), label=f"{u.label}|omega"
        )

    def as_dict(self):
        return {"lower": list(self.lower), "upper": list(self.upper)}


def parse_domain(spec, n):
    """
    Parses ``a:b`` (1D, or the same interval on every axis) or
    ``a:b,c:d`` (2D) into a Domain.
    """
    try:
        parts = [tuple(float(x) for x in p.split(":")) for p in str(spec).split(",")]
    except ValueError as e:
        raise InputError(f"Invalid domain {spec!r}: {e}")
    if any(len(p) != 2 for p in parts):
        raise InputError(f"Invalid domain {spec!r}; expected a:b or a:b,c:d")
    if len(parts) == 1:
        parts = parts * n
    if len(parts) != n:
        raise InputError(f"domain {spec!r} does not have {n} axes")
    return Domain(tuple(p[0] for p in parts), tuple(p[1] for p in parts))
