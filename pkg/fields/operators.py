"""
Description: Approximation operators on grid fields: mollification,
truncation, constant gauge shifts and the modulus |u|.

All operators return new fields and keep the zero extension outside the
(possibly updated) support radius.
"""

import logging
import math

import numpy as np
from scipy import ndimage

from orliczlab.exceptions import InputError, ResolutionError

from .samples import plane_phase

logger = logging.getLogger(__name__)


def bump_kernel(grid, eps):
    """
    The standard mollifier exp(-1 / (1 - |x/eps|^2)) on B_eps sampled on the
    grid spacing and renormalized to unit discrete mass (sum * h^n = 1).
    """
    half = int(math.floor(eps / grid.h))
    offsets = grid.h * np.arange(-half, half + 1)
    mesh = np.meshgrid(*([offsets] * grid.n), indexing="ij")
    r2 = sum(x**2 for x in mesh) / eps**2
    kernel = np.zeros_like(r2)
    inside = r2 < 1.0
    kernel[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    kernel /= kernel.sum() * grid.cell_volume
    return kernel


def mollify(u, eps):
    """
    u_eps = u * rho_eps as a discrete convolution.

    Raises:
        ResolutionError: eps < 2h, or the grown support leaves the grid.
    """
    grid = u.grid
    if not (math.isfinite(eps) and eps > 0):
        raise InputError(f"eps must be positive, got {eps}")
    if eps < 2.0 * grid.h:
        raise ResolutionError(
            f"eps = {eps:g} is below 2h = {2.0 * grid.h:g}; the kernel is not resolved"
        )
    radius = u.support_radius + eps
    if radius > grid.L - grid.h:
        raise ResolutionError(
            f"mollified support radius {radius:g} does not fit in the grid (L = {grid.L:g})"
        )
    kernel = bump_kernel(grid, eps) * grid.cell_volume
    logger.debug(f"Mollifying {u.label} with eps={eps:g} ({kernel.shape[0]} taps per axis)")
    re = ndimage.convolve(u.real, kernel, mode="constant", cval=0.0)
    im = ndimage.convolve(u.imag, kernel, mode="constant", cval=0.0)
    values = re + 1j * im
    # round-off from the convolution must not leak past the support ball
    values[grid.radius() > radius] = 0.0
    return u.with_values(values, support_radius=radius, label=f"mollify({u.label},{eps:g})")


def cutoff_profile(r):
    """q(r) = 1 on [0, 1], 1 - 3(r-1)^2 + 2(r-1)^3 on [1, 2], 0 beyond."""
    r = np.asarray(r, dtype=float)
    t = np.clip(r - 1.0, 0.0, 1.0)
    return 1.0 - 3.0 * t**2 + 2.0 * t**3


def cutoff(grid, k):
    """eta_k(x) = q(|x| / k); |grad eta_k| <= 1.5 / k."""
    return cutoff_profile(grid.radius() / k)


def truncate(u, k):
    """u_k = eta_k u."""
    if not (math.isfinite(k) and k > 0):
        raise InputError(f"k must be positive, got {k}")
    if k >= u.support_radius:
        return u.with_values(u.values, label=f"truncate({u.label},{k:g})")
    values = cutoff(u.grid, k) * u.values
    return u.with_values(
        values,
        support_radius=min(u.support_radius, 2.0 * k),
        label=f"truncate({u.label},{k:g})",
    )


def gauge_transform(u, A, c):
    """(e^{i c.x} u, A + c)."""
    c = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
    if c.size == 1 and u.grid.n > 1:
        c = np.repeat(c, u.grid.n)
    if not np.all(np.isfinite(c)):
        raise InputError(f"gauge shift must be finite, got {c}")
    if not np.any(c):
        return u, A
    return plane_phase(u, c), A.shifted(c)


def modulus_field(u):
    return u.with_values(np.abs(u.values), label=f"|{u.label}|")
