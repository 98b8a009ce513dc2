"""
Description: Parent-Class of every OrliczLab management command.

It owns the shared flags, merges the configuration (settings defaults, then a
``--config`` JSON file, then explicit flags), derives the config digest and
output directory, and writes the run manifest next to the command's files.
"""

import csv
import functools
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from fields.grid import Grid
from fields.potentials import parse_potential
from lab.report import write_pdf, write_report
from lab.runner import battery_passed, run_battery
from modulars.config import QuadratureConfig
from modulars.quotient import check_order
from orlicz.families import parse_family
from orliczlab.exceptions import InputError

logger = logging.getLogger(__name__)

SHARED_DEFAULTS = {
    "dim": 1,
    "L": 8.0,
    "N": 256,
    "family": "power:2",
    "potential": "zero",
}
"""Defaults of the shared flags that do not come from the settings."""

NON_SEMANTIC = ("threads",)
"""Config keys left out of the digest: they never change a result."""

SHA_PREFIX = 12


def usage_error(parser, message):
    """argparse errors exit with status 1 like every other input error."""
    if parser.called_from_command_line:
        parser.print_usage(sys.stderr)
        parser.exit(1, f"{parser.prog}: error: {message}\n")
    raise CommandError(f"Error: {message}", returncode=1)


def parse_ladder(value):
    """A list of orders from ``0.6,0.7`` or a JSON list."""
    if isinstance(value, str):
        try:
            value = [float(s) for s in value.split(",") if s.strip()]
        except ValueError as e:
            raise InputError(f"Invalid s ladder {value!r}: {e}")
    ladder = [check_order(float(s)) for s in value]
    if not ladder:
        raise InputError("the s ladder is empty")
    return ladder


def config_digest(command, config):
    semantic = {k: v for k, v in config.items() if k not in NON_SEMANTIC}
    payload = json.dumps({"command": command, "config": semantic}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class LabCommand(BaseCommand):
    """
    Base class for OrliczLab commands.

    Subclasses declare ``defaults`` for their own options (every option
    defaults to None on the parser so explicit flags can be told apart) and
    implement ``run(config)``. Files are written through ``write_rows`` /
    ``write_json`` or recorded with ``add_output`` so the manifest lists them.
    """

    defaults = {}
    """Command specific config defaults, keyed by option dest."""

    @property
    def command(self):
        return self.__module__.rsplit(".", 1)[-1]

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = functools.partial(usage_error, parser)
        return parser

    def add_arguments(self, parser):
        parser.add_argument("--config", help="JSON file with config values; flags override it")
        parser.add_argument("--out", help="Output directory")
        parser.add_argument("--threads", type=int, help="Worker threads")
        parser.add_argument("--seed", type=int, help="Seed of randomized checks")
        parser.add_argument("--dim", type=int, help="Dimension n (1 or 2)")
        parser.add_argument("--L", type=float, dest="L", help="Grid half width")
        parser.add_argument("--N", type=int, dest="N", help="Grid points per axis")
        parser.add_argument("--family", help="Orlicz family, e.g. power:2 or blend:2:4")
        parser.add_argument("--potential", help="zero, const:c, shear:m or wave:a,k")
        parser.add_argument(
            "--shell-policy", dest="shell_policy", choices=["omit", "taylor"]
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def load_config(self, options):
        """
        Raises:
            InputError: unreadable config file or unknown keys in it.
        """
        config = {
            "threads": settings.DEFAULT_THREADS,
            "seed": settings.DEFAULT_SEED,
            "shell_policy": settings.DEFAULT_SHELL_POLICY,
            **SHARED_DEFAULTS,
            **self.defaults,
        }
        if options.get("config"):
            path = Path(options["config"])
            try:
                from_file = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise InputError(f"Cannot read config file {path}: {e}")
            if not isinstance(from_file, dict):
                raise InputError(f"Config file {path} must hold a JSON object")
            unknown = sorted(set(from_file) - set(config))
            if unknown:
                raise InputError(f"Unknown config keys in {path}: {unknown}")
            config.update(from_file)
        config.update({k: v for k, v in options.items() if k in config and v is not None})
        if int(config["threads"]) < 1:
            raise InputError(f"threads must be >= 1, got {config['threads']}")
        return config

    # Builders shared by the commands
    def grid(self):
        c = self.config
        return Grid(int(c["dim"]), float(c["L"]), int(c["N"]))

    def family(self):
        return parse_family(self.config["family"])

    def potential(self, grid):
        return parse_potential(self.config["potential"], grid)

    def quadrature(self):
        return QuadratureConfig.from_settings(
            shell_policy=self.config["shell_policy"], workers=int(self.config["threads"])
        )

    def ladder(self):
        return parse_ladder(self.config["s_ladder"])

    # Output files
    def add_output(self, path):
        self.outputs.append(str(path))
        return path

    def write_rows(self, name, rows, columns=None):
        path = self.out_dir / name
        columns = columns or (list(rows[0]) if rows else [])
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
        return self.add_output(path)

    def write_json(self, name, data):
        path = self.out_dir / name
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return self.add_output(path)

    def write_manifest(self, wall_ms):
        c = self.config
        ladder = c.get("s_ladder")
        manifest = {
            "command": self.command,
            "config_sha": self.config_sha,
            "grid": {"n": int(c["dim"]), "L": float(c["L"]), "N": int(c["N"])},
            "family": c["family"],
            "potential": c["potential"],
            "s_ladder": parse_ladder(ladder) if ladder is not None else None,
            "outputs": list(self.outputs),
            "wall_ms": wall_ms,
            "config": c,
        }
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path

    def run(self, config):
        raise NotImplementedError

    def handle(self, *args, **options):
        start = time.perf_counter()
        self.outputs = []
        try:
            self.config = self.load_config(options)
            self.config_sha = config_digest(self.command, self.config)
            run_name = f"{self.command}-{self.config_sha[:SHA_PREFIX]}"
            self.out_dir = Path(options.get("out") or Path(settings.OUTPUT_PATH) / run_name)
            self.out_dir.mkdir(parents=True, exist_ok=True)
            logger.info(f"{self.command}: writing to {self.out_dir}")
            failure = self.run(self.config)
        except InputError as e:
            raise CommandError(str(e), returncode=1)
        wall_ms = round(1000.0 * (time.perf_counter() - start))
        self.write_manifest(wall_ms)
        if failure:
            raise CommandError(failure, returncode=2)


class BatteryCommand(LabCommand):
    """Runs a battery of lab suites and writes its CSV, summary and optional PDF."""

    battery = None
    title = None
    defaults = {
        "L": 2.0,
        "N": 128,
        "potential": "const:1",
        "s_ladder": "0.3,0.6,0.9",
        "suites": None,
        "pdf": False,
    }

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--suite",
            action="append",
            dest="suites",
            help="Run only this suite; may be repeated",
        )
        parser.add_argument(
            "--pdf", action="store_true", default=None, help="Also render report.pdf"
        )
        parser.add_argument("--s-ladder", dest="s_ladder", help="Comma separated orders")

    def context(self, grid):
        """Parameters offered to every suite; each takes the ones it declares."""
        return {
            "orlicz": self.family(),
            "grid": grid,
            "A": self.potential(grid),
            "s_ladder": tuple(self.ladder()),
            "cfg": self.quadrature(),
            "seed": int(self.config["seed"]),
        }

    def run(self, config):
        grid = self.grid()
        results = run_battery(
            self.battery,
            self.context(grid),
            workers=int(config["threads"]),
            only=config.get("suites"),
        )
        for path in write_report(self.out_dir, results):
            self.add_output(path)
        if config["pdf"]:
            manifest = {k: config[k] for k in ("family", "potential")}
            manifest["grid"] = grid.as_dict()
            self.add_output(write_pdf(self.out_dir / "report.pdf", results, self.title, manifest))

        for name, output in results.items():
            total, passed, failed, skipped = output["summary"]
            style = self.style.SUCCESS if output["result"] == "PASS" else self.style.ERROR
            self.stdout.write(
                style(f"{name}: {output['result']} ({passed}/{total} passed, {skipped} skipped)")
            )
            for check, r in output["checks"].items():
                if r["status"] == "FAIL":
                    self.stdout.write(f"  {check}: {r['message']}")
        if not battery_passed(results):
            failed = [name for name, o in results.items() if o["result"] != "PASS"]
            return f"{self.battery} failed: {', '.join(failed)}"
        return None
