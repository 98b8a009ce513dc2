"""
Description: Angular and radial rules for integrals over rays leaving a point.

For a point x strictly inside an axis-aligned rectangle, ``rectangle_rule``
returns unit directions w, angular weights and the distance rho(w) from x to
the rectangle boundary along w. In 2D the circle is split at the four corner
angles so that rho is smooth on every sector, and each sector carries a
Gauss-Legendre rule.
"""

import math

import numpy as np

from orliczlab.exceptions import InputError


def gauss_legendre(nodes):
    x, w = np.polynomial.legendre.leggauss(int(nodes))
    return x, w


def rectangle_rule(points, lower, upper, nodes=16):
    """
    Args:
        points: (M, n) array of points.
        lower, upper: rectangle corners, broadcasting against ``points``.
        nodes: Gauss-Legendre nodes per sector (2D only).

    Returns:
        tuple: (directions (M, Q, n), weights (M, Q), rho (M, Q)).
    """
    points = np.asarray(points, dtype=float)
    M, n = points.shape
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (M, n))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (M, n))
    if np.any(points <= lower) or np.any(points >= upper):
        raise InputError("rectangle rule needs points strictly inside the rectangle")

    if n == 1:
        directions = np.broadcast_to(np.array([[1.0], [-1.0]]), (M, 2, 1))
        weights = np.ones((M, 2))
        rho = np.stack([upper[:, 0] - points[:, 0], points[:, 0] - lower[:, 0]], axis=1)
        return directions, weights, rho

    x, y = points[:, 0], points[:, 1]
    x_lo, y_lo = lower[:, 0], lower[:, 1]
    x_hi, y_hi = upper[:, 0], upper[:, 1]
    c1 = np.arctan2(y_hi - y, x_hi - x)
    c2 = np.arctan2(y_hi - y, x_lo - x)
    c3 = np.arctan2(y_lo - y, x_lo - x) + 2.0 * math.pi
    c4 = np.arctan2(y_lo - y, x_hi - x)
    starts = np.stack([c4, c1, c2, c3], axis=1)
    ends = np.stack([c1, c2, c3, c4 + 2.0 * math.pi], axis=1)
    # faces: x = x_hi, y = y_hi, x = x_lo, y = y_lo
    face_axis = np.array([0, 1, 0, 1])
    face_value = np.stack([x_hi, y_hi, x_lo, y_lo], axis=1)
    coord = np.stack([x, y, x, y], axis=1)

    gx, gw = gauss_legendre(nodes)
    half = 0.5 * (ends - starts)
    theta = starts[:, :, None] + half[:, :, None] * (gx[None, None, :] + 1.0)
    weights = half[:, :, None] * gw[None, None, :]
    cos, sin = np.cos(theta), np.sin(theta)
    component = np.where(face_axis[None, :, None] == 0, cos, sin)
    rho = (face_value - coord)[:, :, None] / component

    Q = 4 * int(nodes)
    directions = np.stack([cos, sin], axis=-1).reshape(M, Q, 2)
    return directions, weights.reshape(M, Q), rho.reshape(M, Q)


def radial_rule(h, extent, cap=math.inf, nodes=8):
    """
    Composite Gauss-Legendre rule for t in [0, extent] whose panel widths
    start at h/4, grow like half the distance travelled (plus h/2) and never
    exceed ``cap``.

    Returns:
        tuple: (t, w).
    """
    gx, gw = gauss_legendre(nodes)
    edges = [0.0]
    while edges[-1] < extent:
        t = edges[-1]
        width = min(0.5 * (0.5 * h + t), cap)
        edges.append(min(t + width, extent))
    edges = np.array(edges)
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    t = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    return t, w
