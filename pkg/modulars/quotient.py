"""
Description: The magnetic Hölder quotient

    D_s^A u(x, y) = (u(x) - e^{i (x - y) . A((x + y) / 2)} u(y)) / |x - y|^s

with the potential evaluated at the exact midpoint of the pair.
"""

import numpy as np

from orliczlab.exceptions import DomainError, SingularityError


def check_order(s):
    """
    Raises:
        DomainError: s is not in (0, 1).
    """
    s = float(s)
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    return s


def pair_quotient(ux, uy, x, y, A, s):
    """Vectorized quotient for node values ux, uy at points x, y of shape (..., n)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(x - y, axis=-1)
    phase = np.exp(1j * A.link_phase(x, y))
    return (ux - phase * uy) / r**s


def holder_quotient(u, A, s, x, y):
    """
    D_s^A u(x, y) for grid points x and y.

    Raises:
        DomainError: s is not in (0, 1).
        SingularityError: x = y.
        InputError: x or y is not a grid node.
    """
    s = check_order(s)
    ix = u.grid.index_of(x)
    iy = u.grid.index_of(y)
    if ix == iy:
        raise SingularityError(f"the quotient is singular on the diagonal x = y = {x}")
    px = np.atleast_1d(np.asarray(x, dtype=float))
    py = np.atleast_1d(np.asarray(y, dtype=float))
    return complex(pair_quotient(u.values[ix], u.values[iy], px, py, A, s))
