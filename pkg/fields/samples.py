"""
Description: Analytic test fields sampled on a grid.

Expressions (``:``-separated, as used in config files and on the CLI):

    gaussian:sigma        exp(-|x|^2 / sigma^2), cut where it drops below 1e-16
    bump:R                (1 - |x/R|^2)_+^2
    parabola              (1 - |x|^2)_+
    step:R                indicator of the ball of radius R (discontinuous)
    const:v               v on the whole grid box minus a ring of cells
    phase:c[,c2]:<expr>   exp(i c.x) * <expr>
"""

import logging
import math

import numpy as np

from orliczlab.exceptions import InputError

from .grid import GridField

logger = logging.getLogger(__name__)

GAUSSIAN_CUTOFF = math.sqrt(16.0 * math.log(10.0)) + 0.03
"""Radius in units of sigma beyond which exp(-r^2/sigma^2) < 1e-16."""


def _positive(value, what):
    if not (math.isfinite(value) and value > 0):
        raise InputError(f"{what} must be positive, got {value}")
    return value


def _fits(grid, radius, expr):
    if radius > grid.L - grid.h:
        raise InputError(
            f"{expr}: support radius {radius:g} needs a grid half width above "
            f"{radius + grid.h:g}, got L={grid.L:g}"
        )


def gaussian(grid, sigma=1.0):
    sigma = _positive(sigma, "sigma")
    radius = GAUSSIAN_CUTOFF * sigma
    _fits(grid, radius, f"gaussian({sigma:g})")
    r = grid.radius()
    values = np.where(r <= radius, np.exp(-((r / sigma) ** 2)), 0.0)
    return GridField(grid, values, radius, label=f"gaussian:{sigma:g}")


def bump(grid, R=1.0):
    R = _positive(R, "R")
    _fits(grid, R, f"bump({R:g})")
    r = grid.radius()
    values = np.clip(1.0 - (r / R) ** 2, 0.0, None) ** 2
    return GridField(grid, values, R, label=f"bump:{R:g}")


def parabola(grid):
    _fits(grid, 1.0, "parabola")
    r = grid.radius()
    values = np.clip(1.0 - r**2, 0.0, None)
    return GridField(grid, values, 1.0, label="parabola")


def step(grid, R=0.5):
    R = _positive(R, "R")
    _fits(grid, R, f"step({R:g})")
    values = (grid.radius() <= R).astype(float)
    return GridField(grid, values, R, label=f"step:{R:g}")


def constant(grid, value=1.0):
    """v on the box [-L + h, L - 2h]^n, zero on the outer ring of nodes."""
    mask = np.ones(grid.shape, dtype=bool)
    for x in grid.coordinates():
        mask &= (x > -grid.L + 0.5 * grid.h) & (x < grid.L - 1.5 * grid.h)
    values = np.where(mask, value, 0.0)
    radius = float(np.max(grid.radius()[mask])) if mask.any() else 0.0
    return GridField(grid, values, radius, label=f"const:{value:g}")


def plane_phase(u, c):
    """exp(i c.x) u(x)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size != u.grid.n:
        raise InputError(f"phase vector needs {u.grid.n} component(s)")
    phase = np.exp(1j * (u.grid.points() @ c))
    label = "phase:" + ",".join(f"{x:g}" for x in c) + ":" + u.label
    return u.with_values(phase * u.values, label=label)


def sample(expr, grid):
    """
    Samples the named test function on the grid.

    Raises:
        InputError: unknown expression, bad parameters or a support that
        does not fit inside the grid.
    """
    if isinstance(expr, GridField):
        return expr
    text = str(expr).strip()
    name, _, rest = text.partition(":")
    name = name.lower()

    def number(default=None):
        if not rest:
            if default is None:
                raise InputError(f"{name} needs a parameter, got {text!r}")
            return default
        try:
            return float(rest)
        except ValueError:
            raise InputError(f"Invalid parameter in {text!r}")

    if name == "gaussian":
        return gaussian(grid, number(1.0))
    if name == "bump":
        return bump(grid, number(1.0))
    if name == "parabola":
        if rest:
            raise InputError("parabola takes no parameter")
        return parabola(grid)
    if name == "step":
        return step(grid, number(0.5))
    if name == "const":
        return constant(grid, number(1.0))
    if name == "phase":
        vector, _, inner = rest.partition(":")
        if not inner:
            raise InputError(f"phase needs a vector and a base expression, got {text!r}")
        try:
            c = [float(x) for x in vector.split(",")]
        except ValueError:
            raise InputError(f"Invalid phase vector in {text!r}")
        if len(c) == 1:
            c = c * grid.n
        return plane_phase(sample(inner, grid), c)
    raise InputError(
        f"Unknown field expression {text!r}; expected gaussian, bump, parabola, "
        "step, const or phase"
    )
