"""
Description: Spot checks of the Gamma-limit of J_s(u) = (1 - s) I_{s,G}^A(u)
towards J(u) = I_{G~}^A(u) along concrete sequences u_k -> u:

    constant     u_k = u               (recovery side, J_{s_k}(u) -> J(u))
    mollified    u_k = u * rho_{eps_k}, eps_k = 2^-k
    truncated    u_k = eta_{r_k} u,     r_k = (1 - 2^-k) support_radius

The liminf side compares J(u) with the smallest J_{s_k}(u_k) over the last
TAIL ladder points. The affine extrapolation of the values is reported next
to it but does not decide the result.
"""

import logging
from dataclasses import dataclass

from fields.operators import mollify, truncate
from modulars.config import QuadratureConfig
from modulars.fractional import modular_IsGA
from modulars.luxemburg import luxemburg_distance, luxemburg_norm
from orliczlab.exceptions import InputError, PreconditionError

from .bbm import (
    DEFAULT_LADDER,
    GAP_FLOOR,
    bbm_target,
    check_ladder,
    extrapolate,
    ladder_map,
    relative_gap,
)

logger = logging.getLogger(__name__)

SEQUENCES = ("constant", "mollified", "truncated")

TAIL = 3
"""Ladder points the liminf side looks at."""

CONVERGENCE_TOLERANCE = 0.05
"""Largest accepted ||u_k - u||_G / ||u||_G at the end of the sequence."""

LIMINF_TOLERANCE = 0.05
"""Accepted relative undershoot of the tail minimum below J(u)."""

LIMSUP_TOLERANCE = 0.03
"""Accepted relative gap of the extrapolated constant sequence from J(u)."""


@dataclass
class GammaReport:
    sequence: str
    s_ladder: list
    values: list
    distances: list
    target: float
    tail_min: float
    liminf_gap: float
    extrapolated: float
    limsup_gap: float
    extrapolated_margin: float
    tolerance: float = LIMINF_TOLERANCE

    @property
    def liminf_holds(self):
        """J(u) <= min over the tail of J_{s_k}(u_k) + tolerance J(u)."""
        return self.liminf_gap >= -self.tolerance

    @property
    def limsup_holds(self):
        """Only the constant sequence is a recovery sequence."""
        return self.sequence != "constant" or self.limsup_gap <= LIMSUP_TOLERANCE

    @property
    def passed(self):
        return self.liminf_holds and self.limsup_holds

    def as_rows(self):
        """CSV rows: k, s, value, distance, target."""
        return [
            {"k": k, "s": s, "value": repr(v), "distance": repr(d), "target": repr(self.target)}
            for k, (s, v, d) in enumerate(zip(self.s_ladder, self.values, self.distances), 1)
        ]

    def as_dict(self):
        return {
            "sequence": self.sequence,
            "target": self.target,
            "tail_min": self.tail_min,
            "liminf_gap": self.liminf_gap,
            "extrapolated": self.extrapolated,
            "limsup_gap": self.limsup_gap,
            "extrapolated_margin": self.extrapolated_margin,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def sequence_terms(u, sequence, count):
    """The first ``count`` terms of the named sequence."""
    if sequence == "constant":
        return [u] * count
    if sequence == "mollified":
        return [mollify(u, 2.0**-k) for k in range(1, count + 1)]
    if sequence == "truncated":
        return [truncate(u, (1.0 - 2.0**-k) * u.support_radius) for k in range(1, count + 1)]
    raise InputError(f"Unknown sequence {sequence!r}; expected one of {SEQUENCES}")


def gamma_check(F, A, u, sequence="constant", s_ladder=DEFAULT_LADDER, cfg=None):
    """
    Evaluates J_{s_k}(u_k) along the ladder and compares with J(u).

    The liminf gap is the signed relative excess of the tail minimum over
    J(u); the limsup gap is the relative distance of the extrapolated values
    from J(u). ``passed`` needs the liminf gap above -tolerance and, for the
    constant sequence, the limsup gap within LIMSUP_TOLERANCE.

    Raises:
        InputError: unknown sequence or bad ladder.
        ResolutionError: a mollifier radius is below two grid steps.
        PreconditionError: u_k does not approach u in the Luxemburg norm;
            carries the last distance.
    """
    ladder = check_ladder(s_ladder)
    cfg = cfg or QuadratureConfig.from_settings()
    terms = sequence_terms(u, sequence, len(ladder))

    if u.is_zero():
        distances = [0.0] * len(ladder)
    else:
        distances = [luxemburg_distance(F, term, u) for term in terms]
        scale = luxemburg_norm(F, u)
        if distances[-1] > CONVERGENCE_TOLERANCE * scale:
            raise PreconditionError(
                f"{sequence} sequence does not approach {u.label}: "
                f"||u_k - u||_G = {distances[-1]:.3g} with ||u||_G = {scale:.3g}",
                distance=distances[-1],
            )

    inner = cfg.with_options(workers=1)

    def evaluate(pair):
        s, term = pair
        return (1.0 - s) * modular_IsGA(F, term, A, s, inner).value

    values = ladder_map(evaluate, list(zip(ladder, terms)), cfg.workers)
    target = bbm_target(F, u, A)
    tail_min = min(values[-TAIL:])
    limit = extrapolate(ladder, values)
    scale = max(target, GAP_FLOOR)
    report = GammaReport(
        sequence=sequence,
        s_ladder=ladder,
        values=values,
        distances=distances,
        target=target,
        tail_min=tail_min,
        liminf_gap=(tail_min - target) / scale,
        extrapolated=limit,
        limsup_gap=relative_gap(limit, target),
        extrapolated_margin=(limit - target) / scale,
    )
    if not report.passed:
        logger.warning(
            f"Gamma check of the {sequence} sequence fails: liminf gap "
            f"{report.liminf_gap:.3g}, limsup gap {report.limsup_gap:.3g}"
        )
    logger.info(
        f"Gamma check {sequence}: tail min {tail_min:.6g}, target {target:.6g}, "
        f"limsup gap {report.limsup_gap:.3g}"
    )
    return report
