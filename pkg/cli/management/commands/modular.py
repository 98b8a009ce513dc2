from cli.base import LabCommand
from fields.samples import sample
from modulars.config import FRACTIONAL_KINDS, KINDS
from modulars.luxemburg import evaluate_modular, luxemburg_norm

TRACE_COLUMNS = ["s", "kind", "value", "error_estimate", "shell_policy", "luxemburg_norm"]


class Command(LabCommand):
    help = "Evaluates a modular of a sampled field, over the s ladder for fractional kinds."

    defaults = {"kind": "IsGA", "u": "gaussian:1", "s_ladder": "0.6,0.7,0.8,0.875,0.925,0.95"}

    def add_command_arguments(self, parser):
        parser.add_argument("--kind", choices=KINDS, help="Modular kind (default IsGA)")
        parser.add_argument("--u", help="Field expression, e.g. gaussian:1 or phase:1:bump:2")
        parser.add_argument("--s-ladder", dest="s_ladder", help="Comma separated orders")

    def run(self, config):
        grid = self.grid()
        F = self.family()
        A = self.potential(grid)
        u = sample(config["u"], grid)
        kind = config["kind"]
        cfg = self.quadrature()
        orders = self.ladder() if kind in FRACTIONAL_KINDS else [None]

        rows = []
        for s in orders:
            report = evaluate_modular(kind, F, u, A, s, cfg)
            row = report.as_row()
            row["luxemburg_norm"] = repr(luxemburg_norm(F, u, kind, s, A, cfg))
            rows.append(row)
            label = kind if s is None else f"{kind}(s={s:g})"
            self.stdout.write(f"{label} = {report.value!r} (+- {report.error_estimate:.3e})")
        self.write_rows("modular.csv", rows, TRACE_COLUMNS)
