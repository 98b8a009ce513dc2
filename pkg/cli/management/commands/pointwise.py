from cli.base import LabCommand
from fields.samples import sample
from limits.bbm import pointwise_bbm, pointwise_consistency
from orliczlab.exceptions import InputError

POINTWISE_COLUMNS = ["s", "re_value", "im_value", "re_target", "im_target"]


class Command(LabCommand):
    help = "Extrapolates the x-rows of the split fractional modular to s = 1 at one grid node."

    defaults = {"u": "gaussian:1", "x": "0", "s_ladder": "0.6,0.7,0.8,0.875,0.925,0.95"}

    def add_command_arguments(self, parser):
        parser.add_argument("--u", help="Field expression (default gaussian:1)")
        parser.add_argument("--x", help="Grid node, comma separated coordinates (default 0)")
        parser.add_argument("--s-ladder", dest="s_ladder", help="Comma separated orders")

    def run(self, config):
        grid = self.grid()
        F = self.family()
        A = self.potential(grid)
        u = sample(config["u"], grid)
        try:
            x = [float(c) for c in str(config["x"]).split(",")]
        except ValueError as e:
            raise InputError(f"Invalid point {config['x']!r}: {e}")
        if len(x) == 1:
            x = x * grid.n

        result = pointwise_bbm(F, u, A, x, self.ladder(), self.quadrature())
        integral, target, gap = pointwise_consistency(F, u, A)
        self.write_rows("pointwise.csv", result.as_rows(), POINTWISE_COLUMNS)
        self.write_json(
            "pointwise.json",
            {
                "point": list(result.point),
                "limits": list(result.limits),
                "targets": [result.re_target, result.im_target],
                "consistency": {"integral": integral, "target": target, "gap": gap},
            },
        )
        self.stdout.write(
            f"x={list(result.point)}: limits ({result.re_limit!r}, {result.im_limit!r}) "
            f"targets ({result.re_target!r}, {result.im_target!r})"
        )
