"""
Description: Quadrature settings and the report returned by every modular
evaluation.
"""

import math
from dataclasses import asdict, dataclass, field, replace

from django.conf import settings

from orliczlab.exceptions import InputError

SHELL_POLICIES = ("omit", "taylor")
EXTERIOR_MODES = ("exact", "bound")

KINDS = ("IG", "IGA", "IsG", "IsGA", "tilde_IG", "tilde_IGA", "tilde_IsG", "tilde_IsGA")
"""Modular kinds. The tilde variants apply G to the modulus |z| instead of
splitting into G(|Re z|) + G(|Im z|)."""

FRACTIONAL_KINDS = ("IsG", "IsGA", "tilde_IsG", "tilde_IsGA")


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Args:
        truncation_radius: R_max of the radial exterior quadrature; None picks
            16 L in 1D and 4 L in 2D. Must be at least the grid half width.
        shell_policy: "taylor" adds the near-field Taylor model to the value,
            "omit" drops it and reports it in the error estimate.
        reduction_block: rows of the pair matrix summed per block.
        near_cells: pairs with |i - j|_inf <= near_cells form the near field.
        angular_nodes: Gauss-Legendre nodes per angular sector in 2D.
        workers: threads used for the pair blocks; never changes the result.
        exterior: "exact" integrates every exterior term, "bound" reports the
            phase-carrying half in the error estimate instead.
    """

    truncation_radius: float = None
    shell_policy: str = "taylor"
    reduction_block: int = 64
    near_cells: int = 1
    angular_nodes: int = 16
    workers: int = 1
    exterior: str = "exact"

    def __post_init__(self):
        if self.shell_policy not in SHELL_POLICIES:
            raise InputError(
                f"shell_policy must be one of {SHELL_POLICIES}, got {self.shell_policy!r}"
            )
        if self.exterior not in EXTERIOR_MODES:
            raise InputError(f"exterior must be one of {EXTERIOR_MODES}, got {self.exterior!r}")
        for name in ("reduction_block", "angular_nodes", "workers"):
            if int(getattr(self, name)) < 1:
                raise InputError(f"{name} must be >= 1, got {getattr(self, name)}")
        if int(self.near_cells) < 0:
            raise InputError(f"near_cells must be >= 0, got {self.near_cells}")
        if self.truncation_radius is not None and not (
            math.isfinite(self.truncation_radius) and self.truncation_radius > 0
        ):
            raise InputError(f"truncation_radius must be positive, got {self.truncation_radius}")

    @classmethod
    def from_settings(cls, **overrides):
        """Defaults from the project settings, then explicit overrides."""
        values = {
            "shell_policy": settings.DEFAULT_SHELL_POLICY,
            "workers": settings.DEFAULT_THREADS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def radius_for(self, grid):
        """
        R_max for the grid.

        Raises:
            InputError: the configured radius is below the grid half width.
        """
        if self.truncation_radius is None:
            return (16.0 if grid.n == 1 else 4.0) * grid.L
        if self.truncation_radius < grid.L:
            raise InputError(
                f"truncation_radius {self.truncation_radius:g} is below the grid "
                f"half width {grid.L:g}"
            )
        return float(self.truncation_radius)

    def with_options(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ModularReport:
    kind: str
    value: float
    s: float = None
    shell_policy: str = None
    error_estimate: float = 0.0
    parts: dict = field(default_factory=dict, compare=False)

    def as_row(self):
        """CSV trace row: s, kind, value, error_estimate, shell_policy."""
        return {
            "s": "" if self.s is None else self.s,
            "kind": self.kind,
            "value": repr(self.value),
            "error_estimate": repr(self.error_estimate),
            "shell_policy": self.shell_policy or "",
        }

    def __float__(self):
        return float(self.value)


def check_kind(kind):
    if kind not in KINDS:
        raise InputError(f"Unknown modular kind {kind!r}; expected one of {KINDS}")
    return kind
