from cli.base import LabCommand
from fields.potentials import parse_potential
from fields.samples import sample
from limits.gamma import SEQUENCES, gamma_check
from orliczlab.exceptions import PreconditionError

GAMMA_COLUMNS = ["k", "s", "value", "distance", "target"]


class Command(LabCommand):
    help = (
        "Evaluates (1 - s_k) I_{s_k,G}^A(u_k) along a sequence u_k -> u and compares the "
        "tail minimum and the extrapolated value with I_{G~}^A(u). Exits with status 2 "
        "when the check fails."
    )

    defaults = {
        "u": "gaussian:1",
        "sequence": "constant",
        "s_ladder": "0.6,0.7,0.8,0.875,0.925,0.95",
    }

    def add_command_arguments(self, parser):
        parser.add_argument("--u", help="Field expression (default gaussian:1)")
        parser.add_argument("--sequence", choices=SEQUENCES, help="Sequence u_k (default constant)")
        parser.add_argument("--s-ladder", dest="s_ladder", help="Comma separated orders")

    def run(self, config):
        grid = self.grid()
        u = sample(config["u"], grid)
        A = parse_potential(config["potential"], grid)
        try:
            report = gamma_check(
                self.family(), A, u, config["sequence"], self.ladder(), self.quadrature()
            )
        except PreconditionError as e:
            return f"{e}"
        self.write_rows("gamma.csv", report.as_rows(), GAMMA_COLUMNS)
        self.write_json("gamma.json", report.as_dict())
        self.stdout.write(
            f"{report.sequence}: tail min {report.tail_min!r} target {report.target!r} "
            f"liminf gap {report.liminf_gap:.3%} limsup gap {report.limsup_gap:.3%}"
        )
        if not report.passed:
            return f"Gamma check of the {report.sequence} sequence failed"
