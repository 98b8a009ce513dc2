from cli.base import LabCommand
from fields.potentials import parse_potential
from fields.samples import sample
from limits.bbm import bbm_sweep, refinement_check

SWEEP_COLUMNS = ["s", "scaled_value", "target", "gap"]


class Command(LabCommand):
    help = "Sweeps (1 - s) I_{s,G}^A(u) over the s ladder and compares the limit with I_{G~}^A(u)."

    defaults = {
        "u": "gaussian:1",
        "s_ladder": "0.6,0.7,0.8,0.875,0.925,0.95",
        "refine": False,
    }

    def add_command_arguments(self, parser):
        parser.add_argument("--u", help="Field expression (default gaussian:1)")
        parser.add_argument("--s-ladder", dest="s_ladder", help="Comma separated orders")
        parser.add_argument(
            "--refine", action="store_true", default=None, help="Repeat the sweep at 2N"
        )

    def build(self, grid):
        return sample(self.config["u"], grid), parse_potential(self.config["potential"], grid)

    def run(self, config):
        grid = self.grid()
        F = self.family()
        cfg = self.quadrature()
        ladder = self.ladder()
        if config["refine"]:
            sweep, fine = refinement_check(F, self.build, grid, ladder, cfg)
            self.write_rows("bbm-2N.csv", fine.as_rows(), SWEEP_COLUMNS)
            self.write_json("bbm-2N.json", fine.as_dict())
        else:
            sweep = bbm_sweep(F, *self.build(grid), ladder, cfg)
        self.write_rows("bbm.csv", sweep.as_rows(), SWEEP_COLUMNS)
        self.write_json("bbm.json", sweep.as_dict())
        self.stdout.write(
            f"extrapolated {sweep.extrapolated!r} target {sweep.target!r} "
            f"gap {sweep.rel_gap:.3%}"
        )
        if config["refine"]:
            self.stdout.write(f"gap at N={2 * grid.N}: {fine.rel_gap:.3%}")
