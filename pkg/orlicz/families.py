#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Description: Orlicz functions G with their densities g = G', log-primitives,
Legendre transforms and the derived growth indices.
"""

__version__ = "0.1.0"

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.interpolate import PchipInterpolator

from orliczlab.exceptions import (
    DegenerateFunctionError,
    DomainError,
    InputError,
    NumericError,
)

logger = logging.getLogger(__name__)

FAMILY_DELIMITER = ":"
"""Separates the family name from its exponents in config strings."""

LEGENDRE_BRACKET = (1e-12, 1e12)
"""Initial bracket of the root search g(t) = s."""

LEGENDRE_TOLERANCE = 1e-12
"""Tolerance on g(t) - s."""

MIN_DECADES = 6.0
"""A t-grid must span at least this many decades."""

# Dyadic Gauss-Legendre rule on (0, 1]: panels [2^-(k+1), 2^-k], k = 0..59
_DYADIC_LEVELS = 60
_PANEL_NODES = 8


def dyadic_rule(levels=_DYADIC_LEVELS, nodes=_PANEL_NODES):
    """
    Gauss-Legendre nodes and weights on the dyadic panels of (0, 1].

    The last panel [0, 2^-levels] is included, so the rule integrates any
    function that is smooth on each panel.

    Returns:
        tuple: (t, w) with ``sum(w * f(t)) ~ integral_0^1 f(t) dt``.
    """
    x, wx = np.polynomial.legendre.leggauss(nodes)
    edges = np.concatenate([2.0 ** -np.arange(levels + 1), [0.0]])
    right, left = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    w = (half[:, None] * wx[None, :]).ravel()
    return t, w


_DYADIC_T, _DYADIC_W = dyadic_rule()


def _as_nonnegative(t, what="t"):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what} must be finite, got {t!r}")
    if np.any(arr < 0):
        raise DomainError(f"{what} must be nonnegative, got {t!r}")
    return arr


class OrliczFunction(ABC):
    """
    Convex increasing G with G(0) = 0 and nondecreasing right derivative g.

    Subclasses implement ``G`` and ``g`` as vectorized numpy functions of a
    nonnegative array; validation happens in the public operations.
    """

    name: str
    p_minus: float
    p_plus: float

    @abstractmethod
    def G(self, t):
        """G evaluated elementwise on a nonnegative array."""

    @abstractmethod
    def g(self, t):
        """Right derivative of G evaluated elementwise on a nonnegative array."""

    @property
    def delta2_C(self):
        """Declared doubling constant, sup G(2t)/G(t)."""
        return 2.0**self.p_plus

    @property
    def quadratic(self):
        """
        True when G(t) = a t^2. Only then does G(|Re z|) + G(|Im z|) = G(|z|)
        hold for every complex z, so the split energy ignores phases.
        """
        return False

    def log_primitive(self, b):
        """
        Phi(b) = integral_0^b G(tau) dtau / tau.

        This is the radial integral behind the spherical limit and the exact
        exterior terms of the fractional modular. The generic version
        integrates ``G(b t) / t`` over the dyadic rule.
        """
        b = np.asarray(b, dtype=float)
        flat = b.reshape(-1)
        out = np.empty_like(flat)
        for i, value in enumerate(flat):
            out[i] = np.sum(_DYADIC_W * self.G(value * _DYADIC_T) / _DYADIC_T)
        return out.reshape(b.shape)

    def evaluate(self, t):
        """
        Returns the pair (G(t), g(t)) for a scalar t >= 0.

        Raises:
            InputError: t is not finite.
            DomainError: t < 0.
        """
        value = float(_as_nonnegative(t))
        return float(self.G(np.array(value))), float(self.g(np.array(value)))

    def legendre(self, s):
        """G*(s) = sup_t {s t - G(t)}. See ``legendre_transform``."""
        return legendre_transform(self, s)

    def config_name(self):
        return self.name

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PowerOrlicz(OrliczFunction):
    """G(t) = t^p / p."""

    p: float
    name: str = field(init=False)

    def __post_init__(self):
        _check_exponent(self.p)
        object.__setattr__(self, "name", f"power:{_fmt(self.p)}")

    @property
    def p_minus(self):
        return self.p

    @property
    def p_plus(self):
        return self.p

    @property
    def quadratic(self):
        return self.p == 2.0

    def G(self, t):
        return np.power(t, self.p) / self.p

    def g(self, t):
        return np.power(t, self.p - 1.0)

    def log_primitive(self, b):
        return np.power(np.asarray(b, dtype=float), self.p) / self.p**2


@dataclass(frozen=True)
class PurePowerOrlicz(OrliczFunction):
    """G(t) = t^p."""

    p: float
    name: str = field(init=False)

    def __post_init__(self):
        _check_exponent(self.p)
        object.__setattr__(self, "name", f"powerp:{_fmt(self.p)}")

    @property
    def p_minus(self):
        return self.p

    @property
    def p_plus(self):
        return self.p

    @property
    def quadratic(self):
        return self.p == 2.0

    def G(self, t):
        return np.power(t, self.p)

    def g(self, t):
        return self.p * np.power(t, self.p - 1.0)

    def log_primitive(self, b):
        return np.power(np.asarray(b, dtype=float), self.p) / self.p


@dataclass(frozen=True)
class BlendOrlicz(OrliczFunction):
    """G(t) = t^p + t^q with 1 < p < q; the Lieberman ratio moves from p to q."""

    p: float
    q: float
    name: str = field(init=False)

    def __post_init__(self):
        _check_exponent(self.p)
        _check_exponent(self.q)
        if not self.p < self.q:
            raise InputError(f"blend needs p < q, got p={self.p}, q={self.q}")
        object.__setattr__(self, "name", f"blend:{_fmt(self.p)}:{_fmt(self.q)}")

    @property
    def p_minus(self):
        return self.p

    @property
    def p_plus(self):
        return self.q

    def G(self, t):
        return np.power(t, self.p) + np.power(t, self.q)

    def g(self, t):
        return self.p * np.power(t, self.p - 1.0) + self.q * np.power(t, self.q - 1.0)

    def log_primitive(self, b):
        b = np.asarray(b, dtype=float)
        return np.power(b, self.p) / self.p + np.power(b, self.q) / self.q


class TabulatedOrlicz(OrliczFunction):
    """
    Orlicz function known on a logarithmic table, e.g. a spherical limit.

    log G and log g are interpolated against log t with monotone cubic
    (PCHIP) interpolation; outside the table both continue as power laws with
    the endpoint Lieberman ratio, so power families are reproduced exactly.
    """

    def __init__(self, name, t_table, G_table, g_table, p_minus, p_plus):
        t_table = np.asarray(t_table, dtype=float)
        G_table = np.asarray(G_table, dtype=float)
        g_table = np.asarray(g_table, dtype=float)
        if t_table.ndim != 1 or t_table.size < 4:
            raise InputError("a tabulated Orlicz function needs at least 4 nodes")
        if np.any(np.diff(t_table) <= 0) or t_table[0] <= 0:
            raise InputError("table abscissae must be positive and increasing")
        if np.any(G_table <= 0) or np.any(g_table <= 0):
            raise DegenerateFunctionError(f"{name}: table contains zero values")
        self.name = name
        self.p_minus = float(p_minus)
        self.p_plus = float(p_plus)
        self.t_table = t_table
        self.G_table = G_table
        self.g_table = g_table
        log_t = np.log(t_table)
        self._log_t_range = (log_t[0], log_t[-1])
        self._log_G = PchipInterpolator(log_t, np.log(G_table), extrapolate=False)
        self._log_g = PchipInterpolator(log_t, np.log(g_table), extrapolate=False)
        ratio = t_table * g_table / G_table
        self._slopes = (ratio[0], ratio[-1])

    def _power_extension(self, t, log_interp, values, offset):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        positive = t > 0
        log_t = np.log(t[positive])
        lo, hi = self._log_t_range
        inner = np.clip(log_t, lo, hi)
        result = log_interp(inner)
        below = log_t < lo
        above = log_t > hi
        result[below] = np.log(values[0]) + (self._slopes[0] - offset) * (
            log_t[below] - lo
        )
        result[above] = np.log(values[-1]) + (self._slopes[1] - offset) * (
            log_t[above] - hi
        )
        out[positive] = np.exp(result)
        return out

    def G(self, t):
        return self._power_extension(t, self._log_G, self.G_table, 0.0)

    def g(self, t):
        return self._power_extension(t, self._log_g, self.g_table, 1.0)


def _fmt(x):
    return f"{x:g}"


def _check_exponent(p):
    if not math.isfinite(p):
        raise InputError(f"exponent must be finite, got {p!r}")
    if p <= 1:
        raise InputError(f"exponent must exceed 1, got {p!r}")


FAMILIES = {
    "power": (PowerOrlicz, 1),
    "powerp_half": (PowerOrlicz, 1),
    "powerp": (PurePowerOrlicz, 1),
    "blend": (BlendOrlicz, 2),
}
"""Config names -> (class, number of exponents)."""


def parse_family(spec):
    """
    Builds an Orlicz function from a config string such as ``power:2``,
    ``powerp:3`` or ``blend:2:4``.

    ``powerp_half:p`` is accepted as a spelling of ``power:p`` (t^p / p).

    Raises:
        InputError: unknown family, wrong exponent count or invalid exponents.
    """
    if isinstance(spec, OrliczFunction):
        return spec
    parts = str(spec).strip().split(FAMILY_DELIMITER)
    family = parts[0].lower()
    if family not in FAMILIES:
        raise InputError(
            f"Unknown Orlicz family {parts[0]!r}; expected one of {sorted(FAMILIES)}"
        )
    cls, count = FAMILIES[family]
    if len(parts) - 1 != count:
        raise InputError(f"{family} takes {count} exponent(s), got {spec!r}")
    try:
        exponents = [float(x) for x in parts[1:]]
    except ValueError as e:
        raise InputError(f"Invalid exponent in {spec!r}: {e}")
    return cls(*exponents)


def default_t_grid():
    """Logarithmic grid over 12 decades used for index and doubling estimates."""
    return np.logspace(-6.0, 6.0, 481)


def _validated_grid(t_grid):
    grid = np.asarray(t_grid, dtype=float).ravel()
    if grid.size == 0:
        raise InputError("t_grid is empty")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        raise InputError("t_grid must contain finite positive values")
    decades = math.log10(grid.max() / grid.min())
    if decades < MIN_DECADES:
        raise InputError(
            f"t_grid spans {decades:.2f} decades, at least {MIN_DECADES:g} required"
        )
    return grid


def _nonzero_G(F, grid):
    values = F.G(grid)
    if np.any(values <= 0):
        bad = grid[values <= 0][0]
        raise DegenerateFunctionError(f"{F.name}: G({bad:g}) = 0 at a positive t")
    return values


def estimate_indices(F, t_grid=None):
    """
    Returns (min, max) of t g(t) / G(t) over ``t_grid``.

    Raises:
        InputError: empty, non-positive or too narrow grid.
        DegenerateFunctionError: G(t) = 0 for some t > 0 of the grid.
    """
    grid = _validated_grid(default_t_grid() if t_grid is None else t_grid)
    ratio = grid * F.g(grid) / _nonzero_G(F, grid)
    return float(ratio.min()), float(ratio.max())


def delta2_constant(F, t_grid=None):
    """Returns max over ``t_grid`` of G(2t) / G(t)."""
    grid = _validated_grid(default_t_grid() if t_grid is None else t_grid)
    ratio = F.G(2.0 * grid) / _nonzero_G(F, grid)
    return float(ratio.max())


def legendre_transform(F, s):
    """
    G*(s) = sup_{t>0} {s t - G(t)}.

    Solves g(t) = s by bisection in log t, starting from the bracket
    [1e-12, 1e12] and widening it geometrically when g does not change sign.

    Raises:
        InputError: s is not finite.
        DomainError: s < 0.
        NumericError: no bracket could be found; carries the searched interval.
    """
    s = float(_as_nonnegative(s, "s"))
    if s == 0.0:
        return 0.0

    def residual(log_t):
        return float(F.g(np.array(math.exp(log_t)))) - s

    lo, hi = (math.log(x) for x in LEGENDRE_BRACKET)
    for _ in range(40):
        if residual(lo) <= 0.0:
            break
        lo -= math.log(1e3)
    for _ in range(40):
        if residual(hi) >= 0.0:
            break
        hi += math.log(1e3)
    if residual(lo) > 0.0 or residual(hi) < 0.0:
        raise NumericError(
            f"{F.name}: g(t) = {s} is not bracketed",
            interval=(math.exp(lo), math.exp(hi)),
        )

    log_t = optimize.bisect(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    t = math.exp(log_t)
    if abs(residual(log_t)) > LEGENDRE_TOLERANCE * max(1.0, s):
        logger.debug(f"{F.name}: Legendre residual {residual(log_t):.3e} at s={s}")
    return s * t - float(F.G(np.array(t)))
