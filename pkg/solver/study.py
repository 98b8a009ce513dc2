"""
Description: Convergence of the fractional minimizers u_s towards the
minimizer u of the local problem with Phi = G~ as s -> 1, together with the
convergence of the minimum values.
"""

import logging
import math
from dataclasses import dataclass, field

from fields.operators import gauge_transform
from limits.bbm import DEFAULT_LADDER, check_ladder, extrapolate, ladder_map, relative_gap
from modulars.luxemburg import luxemburg_distance
from orliczlab.exceptions import OrliczLabError

from .problems import DirichletProblem
from .solve import gauge_residual, solve

logger = logging.getLogger(__name__)

ENERGY_TOLERANCE = 0.03
"""Accepted relative gap of the tail and extrapolated fractional minima from the local minimum."""
TAIL = 3


@dataclass
class StudyRow:
    s: float
    lux_distance: float = math.nan
    frac_energy: float = math.nan
    local_energy: float = math.nan
    iterations: int = 0
    status: str = "ok"
    gauge_residual: float = None

    def as_row(self):
        """CSV row: s, lux_distance, frac_energy, local_energy, iterations, status
        and, for gauge studies, gauge_residual."""
        row = {
            "s": self.s,
            "lux_distance": repr(self.lux_distance),
            "frac_energy": repr(self.frac_energy),
            "local_energy": repr(self.local_energy),
            "iterations": self.iterations,
            "status": self.status,
        }
        if self.gauge_residual is not None:
            row["gauge_residual"] = repr(self.gauge_residual)
        return row


@dataclass
class StudyResult:
    rows: list
    local: object
    checks: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def as_rows(self):
        return [row.as_row() for row in self.rows]


def _strictly_decreasing(values):
    """Strictly decreasing, except that a run of exact zeros is accepted."""
    return all(b < a or (a == 0.0 and b == 0.0) for a, b in zip(values, values[1:]))


def study_checks(rows, local_energy):
    """
    Distances decrease strictly over the ladder tail and the last one is at
    most half of the first. The tail minima stay within ENERGY_TOLERANCE of
    the local minimum and extrapolate to it within the same tolerance.
    """
    ok_rows = [r for r in rows if r.status == "ok"]
    if len(ok_rows) != len(rows):
        return {"all_solved": False}
    distances = [r.lux_distance for r in rows]
    energies = [r.frac_energy for r in rows]
    ladder = [r.s for r in rows]
    bound = ENERGY_TOLERANCE * abs(local_energy)
    limit = extrapolate(ladder, energies)
    checks = {
        "all_solved": True,
        "distances_decreasing": _strictly_decreasing(distances[-TAIL:]),
        "distance_halved": distances[-1] <= 0.5 * distances[0],
        "energy_tail_bounded": all(abs(e - local_energy) <= bound for e in energies[-TAIL:]),
        "energy_limit": relative_gap(limit, local_energy) <= ENERGY_TOLERANCE,
    }
    for name, ok in checks.items():
        if not ok:
            logger.warning(f"Convergence study check {name} failed")
    return checks


def study_diagnostics(rows, local_energy):
    """
    Reported next to the checks without deciding the result: the tail gaps
    |E_s - E_local|, whether they shrink monotonely and the extrapolated
    minimum. The fractional minima may overshoot the local one before the
    ladder ends, so the gaps need not shrink.
    """
    energies = [r.frac_energy for r in rows]
    gaps = [abs(e - local_energy) for e in energies[-TAIL:]]
    solved = all(r.status == "ok" for r in rows)
    return {
        "tail_gaps": gaps,
        "energies_monotone": all(b <= a for a, b in zip(gaps, gaps[1:])),
        "extrapolated_energy": extrapolate([r.s for r in rows], energies) if solved else None,
    }


def convergence_study(F, A, f, domain, s_ladder=DEFAULT_LADDER, cfg=None, gauge_shift=None):
    """
    Solves the fractional problem at every s and the local problem with
    Phi = G~, and tabulates ||u_s - u||_G with the minimum values.

    A failing solve marks its row with the error message; the other rows are
    still reported.

    Raises:
        InputError: bad ladder or source.
        LineSearchError, ConsistencyError: the local solve failed.
    """
    ladder = check_ladder(s_ladder)
    base = DirichletProblem(F, A, f, domain, s=ladder[0], cfg=cfg)
    cfg = base.cfg
    local = solve(base.local_problem(use_limit=True))
    shifted_source = shifted_A = None
    if gauge_shift is not None:
        shifted_source, shifted_A = gauge_transform(f, A, gauge_shift)

    inner = cfg.with_options(workers=1)

    def run(s):
        row = StudyRow(s=s, local_energy=local.energy)
        try:
            result = solve(DirichletProblem(F, A, f, domain, s=s, cfg=inner))
            row.frac_energy = result.energy
            row.iterations = result.iterations
            row.lux_distance = luxemburg_distance(F, result.minimizer, local.minimizer)
            if not result.converged:
                row.status = f"not converged ({result.reason})"
            if shifted_A is not None:
                twin = solve(DirichletProblem(F, shifted_A, shifted_source, domain, s=s, cfg=inner))
                row.gauge_residual = gauge_residual(result.minimizer, twin.minimizer, gauge_shift)
        except OrliczLabError as e:
            logger.warning(f"Study solve at s={s} failed: {e}")
            row.status = f"failed: {e}"
        return row

    rows = ladder_map(run, ladder, cfg.workers)
    result = StudyResult(
        rows=rows,
        local=local,
        checks=study_checks(rows, local.energy),
        diagnostics=study_diagnostics(rows, local.energy),
    )
    logger.info(
        f"Convergence study: local energy {local.energy!r}, "
        f"distances {[round(r.lux_distance, 6) for r in rows]}"
    )
    return result
