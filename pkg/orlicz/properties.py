"""
Description: Sampled checks of the defining properties of Orlicz functions.

Each check returns the worst violation found (<= 0 means the property holds)
so that callers can report margins as well as pass/fail.
"""

import numpy as np

from .families import legendre_transform


def convexity_defect(F, t_grid):
    """max of G((t1+t2)/2) - (G(t1)+G(t2))/2 over consecutive grid points, relative."""
    t = np.sort(np.asarray(t_grid, dtype=float))
    left, right = t[:-1], t[1:]
    mid = F.G(0.5 * (left + right))
    chord = 0.5 * (F.G(left) + F.G(right))
    return float(np.max((mid - chord) / np.maximum(chord, 1e-300)))


def monotonicity_defect(F, t_grid):
    """Largest decrease of G or g between consecutive grid points (<= 0 is fine)."""
    t = np.sort(np.asarray(t_grid, dtype=float))
    dG = -np.diff(F.G(t))
    dg = -np.diff(F.g(t))
    return float(max(dG.max(), dg.max()))


def cotas_violation(F, a, b):
    """
    Worst relative violation of

        min(a^p-, a^p+) G(b) <= G(a b) <= max(a^p-, a^p+) G(b)

    over the paired samples a, b.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    Gab = F.G(a * b)
    Gb = F.G(b)
    low = np.minimum(a**F.p_minus, a**F.p_plus) * Gb
    high = np.maximum(a**F.p_minus, a**F.p_plus) * Gb
    scale = np.maximum(high, 1e-300)
    return float(np.max(np.maximum(low - Gab, Gab - high) / scale))


def young_violation(F, s, t):
    """Worst relative violation of s t <= G(t) + G*(s)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    conj = np.array([legendre_transform(F, x) for x in s])
    rhs = F.G(t) + conj
    return float(np.max((s * t - rhs) / np.maximum(rhs, 1.0)))


def random_pairs(rng, count, low=-3.0, high=3.0):
    """Log-uniform positive samples (a, b) spanning [10^low, 10^high]."""
    a = 10.0 ** rng.uniform(low, high, count)
    b = 10.0 ** rng.uniform(low, high, count)
    return a, b
