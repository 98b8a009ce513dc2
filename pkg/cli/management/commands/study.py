from cli.base import LabCommand
from fields.grid import parse_domain
from fields.samples import sample
from solver.study import convergence_study

STUDY_COLUMNS = ["s", "lux_distance", "frac_energy", "local_energy", "iterations", "status"]


class Command(LabCommand):
    help = (
        "Solves the fractional problems over the s ladder and the local problem with G~, "
        "and tabulates the distances of the minimizers and the minimum values."
    )

    defaults = {
        "L": 2.0,
        "N": 128,
        "f": "const:1",
        "omega": "-1:1",
        "s_ladder": "0.6,0.7,0.8,0.875,0.925,0.95",
        "gauge_shift": None,
    }

    def add_command_arguments(self, parser):
        parser.add_argument("--f", help="Source expression, restricted to Omega (default const:1)")
        parser.add_argument("--omega", help="Domain a:b or a:b,c:d (default -1:1)")
        parser.add_argument("--s-ladder", dest="s_ladder", help="Comma separated orders")
        parser.add_argument(
            "--gauge-shift",
            dest="gauge_shift",
            type=float,
            help="Also solve the gauge twin with A + c and report the residual",
        )

    def run(self, config):
        grid = self.grid()
        domain = parse_domain(config["omega"], grid.n)
        f = domain.restrict(sample(config["f"], grid))
        shift = config["gauge_shift"]
        result = convergence_study(
            self.family(),
            self.potential(grid),
            f,
            domain,
            self.ladder(),
            self.quadrature(),
            gauge_shift=None if shift is None else float(shift),
        )
        columns = STUDY_COLUMNS + (["gauge_residual"] if shift is not None else [])
        self.write_rows("study.csv", result.as_rows(), columns)
        self.write_json(
            "study.json",
            {
                "local_energy": result.local.energy,
                "checks": result.checks,
                "diagnostics": result.diagnostics,
                "passed": result.passed,
            },
        )
        for row in result.rows:
            self.stdout.write(
                f"s={row.s:g}: distance {row.lux_distance!r} energy {row.frac_energy!r} "
                f"[{row.status}]"
            )
        self.stdout.write(f"local energy {result.local.energy!r}")
        for name, ok in result.checks.items():
            style = self.style.SUCCESS if ok else self.style.WARNING
            self.stdout.write(style(f"{name}: {'PASS' if ok else 'FAIL'}"))
        monotone = result.diagnostics["energies_monotone"]
        self.stdout.write(f"energies_monotone: {monotone} (reported only)")
