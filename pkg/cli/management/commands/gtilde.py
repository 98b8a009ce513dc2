from cli.base import LabCommand
from orlicz.spherical import SphericalLimit, spherical_limit


class Command(LabCommand):
    help = "Evaluates the spherical limit G~(a) of an Orlicz family and tabulates G~ / G."

    defaults = {"a": 1.0}

    def add_command_arguments(self, parser):
        parser.add_argument("--a", type=float, help="Argument a >= 0 (default 1.0)")

    def run(self, config):
        F = self.family()
        n = int(config["dim"])
        value = spherical_limit(F, n, float(config["a"]))
        limit = SphericalLimit(F, n)
        c1, c2 = limit.equivalence_constants()
        self.write_rows("gtilde.csv", limit.table(), ["t", "G", "Gtilde", "ratio"])
        self.write_json(
            "gtilde.json",
            {"a": float(config["a"]), "value": value, "equivalence_constants": [c1, c2]},
        )
        self.stdout.write(str(round(value, 12)))
