"""
Description: Built-in fields and potentials the suites run on, sized to the
grid they are sampled on.
"""

import numpy as np

from fields.grid import Domain
from fields.potentials import MagneticPotential
from fields.samples import GAUSSIAN_CUTOFF, sample
from orliczlab.exceptions import InputError

UNIT = 1.0


def support_scale(grid):
    """Largest support radius a built-in field may use on the grid."""
    return 0.6 * (grid.L - grid.h)


def builtin_fields(grid, seed):
    """Fields keyed by label: real, phase-carrying, non-smooth and random."""
    R = support_scale(grid)
    sigma = R / GAUSSIAN_CUTOFF
    gaussian = sample(f"gaussian:{sigma:.6g}", grid)
    bump = sample(f"bump:{R:.6g}", grid)
    rng = np.random.default_rng(seed)
    noise = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return {
        "gaussian": gaussian,
        "phase_gaussian": sample(f"phase:{1.0}:gaussian:{sigma:.6g}", grid),
        "bump": bump,
        "step": sample(f"step:{0.5 * R:.6g}", grid),
        "random": bump.with_values(noise * bump.values, label="random"),
    }


def builtin_pairs(grid, seed):
    """The five (label, u, A) combinations of the diamagnetic suite."""
    fields = builtin_fields(grid, seed)
    n = grid.n
    sine = MagneticPotential.sampled(grid, np.sin, label="sin")
    shear = MagneticPotential.shear(0.5 * np.eye(n), grid)
    return [
        ("gaussian/zero", fields["gaussian"], MagneticPotential.zero(n)),
        ("phase_gaussian/zero", fields["phase_gaussian"], MagneticPotential.zero(n)),
        ("bump/const", fields["bump"], MagneticPotential.constant(np.ones(n))),
        ("random/shear", fields["random"], shear),
        ("step/sin", fields["step"], sine),
    ]


def unit_domain(n):
    """(-1, 1)^n."""
    return Domain((-UNIT,) * n, (UNIT,) * n)


def domain_fields(grid, domain):
    """
    Fields centred at the origin and supported in ``domain``; the parabola
    vanishes on |x| >= 1.

    Raises:
        InputError: the origin is not inside the domain.
    """
    inner = 0.9 * min(min(-a, b) for a, b in zip(domain.lower, domain.upper))
    if inner <= 0.0:
        raise InputError(f"built-in fields need the origin inside {domain.as_dict()}")
    fields = {
        "bump": domain.restrict(sample(f"bump:{inner:.6g}", grid)),
        "gaussian": domain.restrict(sample(f"gaussian:{inner / GAUSSIAN_CUTOFF:.6g}", grid)),
        "phase_bump": domain.restrict(sample(f"phase:{2.0}:bump:{inner:.6g}", grid)),
    }
    if all(a <= -UNIT and b >= UNIT for a, b in zip(domain.lower, domain.upper)):
        fields["parabola"] = sample("parabola", grid)
    return fields
