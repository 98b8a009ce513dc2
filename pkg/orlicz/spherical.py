#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Description: The spherical limit G~ of an Orlicz function G,

    G~(a) = integral over S^{n-1} of integral_0^1 G(a |w_n| t) dt / t dS_w,

which is the density of the s -> 1 limit of the scaled fractional modulars.
"""

__version__ = "0.1.0"

import logging
import math

import numpy as np
from scipy import integrate

from orliczlab.exceptions import ConsistencyError, DomainError, InputError, IntegrabilityError

from .families import TabulatedOrlicz, _DYADIC_T, _DYADIC_W

logger = logging.getLogger(__name__)

RAW_CHECK_ORDERS = (0.5, 0.7, 0.9)
"""Orders s at which the raw (un-substituted) integral is cross-checked."""

RAW_CHECK_TOLERANCE = 1e-6
"""Relative agreement required between the raw and substituted forms."""

SANDWICH_GRID = np.logspace(-3.0, 3.0, 61)

TABLE_GRID = np.logspace(-8.0, 6.0, 281)
"""Abscissae of the tabulated G~ handed to the local solver."""


def sphere_rule(n, nodes=256):
    """
    Quadrature for functions of |w_n| on the unit sphere S^{n-1}.

    n = 1: the two points +-1. n = 2: the trapezoid rule in the angle on a
    quarter circle (|sin| is symmetric), equivalent to the periodic trapezoid
    with 4 * nodes points on the full circle.

    Returns:
        tuple: (c, w) with c = |w_n| at the nodes and ``sum(w * f(c))``
        approximating the surface integral.
    """
    if n == 1:
        return np.array([1.0]), np.array([2.0])
    if n == 2:
        theta = np.linspace(0.0, 0.5 * math.pi, nodes + 1)
        w = np.full(nodes + 1, 0.5 * math.pi / nodes)
        w[0] *= 0.5
        w[-1] *= 0.5
        return np.abs(np.sin(theta)), 4.0 * w
    raise DomainError(f"dimension must be 1 or 2, got {n}")


class SphericalLimit:
    """
    G~ for a base Orlicz function in dimension n.

    Values come from the s-independent substituted form, integrated with
    Gauss-Legendre panels on the dyadic intervals [2^-(k+1), 2^-k] in t and
    the ``sphere_rule`` in the angle.
    """

    def __init__(self, base, n, angular_nodes=256):
        if n not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {n}")
        if not base.p_minus > 1.0:
            raise IntegrabilityError(
                f"{base.name}: p_minus = {base.p_minus} <= 1, the inner integral diverges"
            )
        self.base = base
        self.n = n
        self.c, self.w = sphere_rule(n, angular_nodes)
        self.name = f"tilde[{base.name},n={n}]"

    def _validated(self, a):
        arr = np.asarray(a, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise InputError(f"a must be finite, got {a!r}")
        if np.any(arr < 0):
            raise DomainError(f"a must be nonnegative, got {a!r}")
        return arr

    def value(self, a):
        """G~(a), elementwise."""
        arr = self._validated(a)
        flat = arr.reshape(-1)
        out = np.empty_like(flat)
        kernel = _DYADIC_W / _DYADIC_T
        for i, x in enumerate(flat):
            inner = self.base.G(x * self.c[:, None] * _DYADIC_T[None, :]) @ kernel
            out[i] = self.w @ inner
        return out.reshape(arr.shape)

    __call__ = value

    def derivative(self, a):
        """g~(a) = G~'(a), by differentiating under the integral sign."""
        arr = self._validated(a)
        flat = arr.reshape(-1)
        out = np.empty_like(flat)
        for i, x in enumerate(flat):
            inner = self.base.g(x * self.c[:, None] * _DYADIC_T[None, :]) @ _DYADIC_W
            out[i] = self.w @ (self.c * inner)
        return out.reshape(arr.shape)

    def closed_form(self, a):
        """G~(a) through the log-primitive: integral over S of Phi(a |w_n|)."""
        arr = self._validated(a)
        return self.base.log_primitive(arr[..., None] * self.c) @ self.w

    def raw_value(self, a, s):
        """
        The raw spherical-limit integral at order s,

            (1 - s) integral over S of integral_0^1 G(a |w_n| r^{1-s}) dr / r,

        integrated in v = log r on (-inf, 0] with adaptive quadrature.
        """
        a = float(self._validated(a))
        if not 0.0 < s < 1.0:
            raise DomainError(f"s must lie in (0, 1), got {s}")
        if a == 0.0:
            return 0.0
        c = self.c
        base = self.base

        def integrand(v):
            return (1.0 - s) * base.G(a * c * math.exp((1.0 - s) * v))

        inner, _ = integrate.quad_vec(
            integrand, -np.inf, 0.0, epsabs=0.0, epsrel=1e-12, norm="max", limit=400
        )
        return float(self.w @ inner)

    def verify(self, a, orders=RAW_CHECK_ORDERS):
        """
        Asserts that the raw integral at every order matches G~(a).

        Raises:
            ConsistencyError: a raw evaluation disagrees beyond the tolerance.
        """
        target = float(self.value(a))
        for s in orders:
            raw = self.raw_value(a, s)
            gap = abs(raw - target) / max(abs(target), 1e-300)
            if target != 0.0 and gap > RAW_CHECK_TOLERANCE:
                raise ConsistencyError(
                    f"{self.name}: raw integral at s={s} gives {raw!r}, "
                    f"substituted form gives {target!r} (relative gap {gap:.2e})"
                )
        return target

    def equivalence_constants(self, t_grid=None):
        """Empirical (c1, c2) with c1 G <= G~ <= c2 G on the sampled t."""
        t = SANDWICH_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
        ratio = self.value(t) / self.base.G(t)
        return float(ratio.min()), float(ratio.max())

    def table(self, t_grid=None):
        """Rows (t, G, Gtilde, ratio) for CSV export."""
        t = SANDWICH_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
        G = self.base.G(t)
        tilde = self.value(t)
        ratio = np.divide(tilde, G, out=np.zeros_like(tilde), where=G > 0)
        return [
            {"t": float(a), "G": float(b), "Gtilde": float(c), "ratio": float(d)}
            for a, b, c, d in zip(t, G, tilde, ratio)
        ]

    def as_orlicz(self, t_grid=None):
        """G~ as a TabulatedOrlicz, sharing the base Lieberman indices."""
        t = TABLE_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
        logger.debug(f"Tabulating {self.name} on {t.size} nodes")
        return TabulatedOrlicz(
            self.name,
            t,
            self.value(t),
            self.derivative(t),
            self.base.p_minus,
            self.base.p_plus,
        )


def spherical_limit(F, n, a, verify=True):
    """
    Returns G~(a) for the Orlicz function F in dimension n.

    With ``verify`` the raw integral is evaluated at s = 0.5, 0.7, 0.9 and must
    agree with the substituted form.

    Raises:
        DomainError: n not in {1, 2} or a < 0.
        IntegrabilityError: p_minus <= 1.
        ConsistencyError: raw and substituted forms disagree.
    """
    limit = SphericalLimit(F, n)
    if verify:
        return limit.verify(a)
    return float(limit.value(a))
