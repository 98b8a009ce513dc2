from cli.base import LabCommand
from fields.grid import parse_domain
from fields.io import export_field
from fields.samples import sample
from solver.problems import LOCAL, DirichletProblem
from solver.solve import solve


class Command(LabCommand):
    help = "Minimizes one Dirichlet problem, fractional of order s or local, from u = 0."

    defaults = {
        "L": 2.0,
        "N": 128,
        "s": 0.9,
        "local": False,
        "tilde": False,
        "f": "const:1",
        "omega": "-1:1",
    }

    def add_command_arguments(self, parser):
        parser.add_argument("--s", type=float, help="Order in (0, 1) (default 0.9)")
        parser.add_argument(
            "--local", action="store_true", default=None, help="Solve the local problem"
        )
        parser.add_argument(
            "--tilde", action="store_true", default=None, help="Local problem with Phi = G~"
        )
        parser.add_argument("--f", help="Source expression, restricted to Omega (default const:1)")
        parser.add_argument("--omega", help="Domain a:b or a:b,c:d (default -1:1)")

    def run(self, config):
        grid = self.grid()
        domain = parse_domain(config["omega"], grid.n)
        f = domain.restrict(sample(config["f"], grid))
        problem = DirichletProblem(
            self.family(),
            self.potential(grid),
            f,
            domain,
            s=LOCAL if config["local"] else float(config["s"]),
            use_limit=bool(config["tilde"]),
            cfg=self.quadrature(),
        )
        result = solve(problem)
        for path in export_field(result.minimizer, self.out_dir / "solution"):
            self.add_output(path)
        self.write_rows(
            "history.csv",
            [{"iteration": i, "energy": repr(e)} for i, e in enumerate(result.history)],
            ["iteration", "energy"],
        )
        self.write_json("solve.json", {"problem": problem.describe(), **result.as_dict()})
        self.stdout.write(
            f"energy {result.energy!r} after {result.iterations} iterations "
            f"(gradient norm {result.gradient_norm:.3e}, converged={result.converged})"
        )
