from cli.base import BatteryCommand
from fields.grid import parse_domain


class Command(BatteryCommand):
    help = (
        "Runs the inequality suites (diamagnetic, Poincaré, lemma ratios, scaling). "
        "Exits with status 2 when a check fails."
    )

    battery = "lab"
    title = "OrliczLab Inequalities"
    defaults = {**BatteryCommand.defaults, "omega": None, "ceilings": None}

    def add_command_arguments(self, parser):
        super().add_command_arguments(parser)
        parser.add_argument("--omega", help="Poincaré domain a:b or a:b,c:d (default unit box)")
        parser.add_argument("--ceilings", help="Ratio ceilings JSON (default CEILINGS_PATH)")

    def context(self, grid):
        context = super().context(grid)
        if self.config["omega"]:
            context["domain"] = parse_domain(self.config["omega"], grid.n)
        if self.config["ceilings"]:
            context["ceilings_path"] = self.config["ceilings"]
        return context
