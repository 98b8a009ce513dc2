from cli.base import BatteryCommand

FAST_POINTS = 64


class Command(BatteryCommand):
    help = (
        "Runs the full invariant battery: Orlicz, field and modular invariants, the "
        "inequality suites, BBM, the Gamma checks, the solver and the convergence study. "
        "Exits with status 2 when a check fails."
    )

    battery = "selftest"
    title = "OrliczLab Selftest"
    defaults = {**BatteryCommand.defaults, "fast": False}

    def add_command_arguments(self, parser):
        super().add_command_arguments(parser)
        parser.add_argument(
            "--fast",
            action="store_true",
            default=None,
            help=f"{FAST_POINTS}-point grids and coarse BBM and solver checks",
        )

    def load_config(self, options):
        config = super().load_config(options)
        if config["fast"] and options.get("N") is None:
            config["N"] = FAST_POINTS
        return config

    def context(self, grid):
        return {**super().context(grid), "fast": bool(self.config["fast"])}
