import csv
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from limits.gamma import GammaReport
from orliczlab.__main__ import main

from .base import config_digest, parse_ladder


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def call(self, name, *args):
        stdout = StringIO()
        call_command(name, *args, "--out", str(self.out), stdout=stdout)
        return stdout.getvalue()

    def manifest(self):
        return json.loads((self.out / "manifest.json").read_text())

    def rows(self, name):
        with open(self.out / name, newline="") as f:
            return list(csv.DictReader(f))


class ConfigTests(CommandTestCase):
    def test_parse_ladder(self):
        """Ladders come from comma strings or lists; orders must lie in (0, 1)."""
        self.assertEqual(parse_ladder("0.6, 0.7,0.8"), [0.6, 0.7, 0.8])
        self.assertEqual(parse_ladder([0.5]), [0.5])
        with self.assertRaises(ValueError):
            parse_ladder("0.5,1.2")
        with self.assertRaises(ValueError):
            parse_ladder("")

    def test_digest(self):
        """The digest ignores the thread count and follows every semantic input."""
        config = {"family": "power:2", "N": 64, "threads": 1, "seed": 1}
        same = config_digest("bbm", {**config, "threads": 8})
        self.assertEqual(config_digest("bbm", config), same)
        base = config_digest("bbm", config)
        self.assertNotEqual(base, config_digest("bbm", {**config, "seed": 2}))
        self.assertNotEqual(base, config_digest("modular", config))

    def test_file_then_flags(self):
        """Config file values override defaults; explicit flags override the file."""
        path = self.out / "config.json"
        path.write_text(json.dumps({"family": "powerp:2", "a": 2.0}))
        self.assertEqual(self.call("gtilde", "--config", str(path)).strip(), "4.0")
        self.assertEqual(self.call("gtilde", "--config", str(path), "--a", "3").strip(), "9.0")
        self.assertEqual(self.manifest()["config"]["a"], 3.0)

    def test_unknown_config_key(self):
        """Unknown keys in the config file are input errors."""
        path = self.out / "config.json"
        path.write_text(json.dumps({"colour": "blue"}))
        with self.assertRaises(CommandError) as ctx:
            self.call("gtilde", "--config", str(path))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_default_output_directory(self):
        """Without --out files go to OUTPUT_PATH/<command>-<sha prefix>."""
        with override_settings(OUTPUT_PATH=self.out):
            call_command("gtilde", "--family", "powerp:2", stdout=StringIO())
        (run_dir,) = self.out.iterdir()
        manifest = json.loads((run_dir / "manifest.json").read_text())
        self.assertEqual(run_dir.name, f"gtilde-{manifest['config_sha'][:12]}")


class ExitStatusTests(CommandTestCase):
    def test_input_errors(self):
        """Bad families, potentials and flag values exit with status 1."""
        for args in (
            ("gtilde", "--family", "cubic:3"),
            ("modular", "--potential", "vortex:1", "--kind", "IGA"),
            ("solve", "--s", "abc"),
            ("solve", "--s", "1.5"),
        ):
            with self.subTest(args=args):
                with self.assertRaises(CommandError) as ctx:
                    self.call(*args)
                self.assertEqual(ctx.exception.returncode, 1)

    def test_console_script(self):
        """The console entry point returns 0, 1 for usage and input errors."""
        out = str(self.out)
        with mock.patch("sys.stdout", new=StringIO()), mock.patch("sys.stderr", new=StringIO()):
            self.assertEqual(main(["gtilde", "--family", "powerp:2", "--out", out]), 0)
            self.assertEqual(main(["gtilde", "--family", "cubic:3", "--out", out]), 1)
            self.assertEqual(main(["gtilde", "--bogus"]), 1)
            self.assertEqual(main(["frobnicate"]), 1)

    def test_failed_battery(self):
        """A failing suite exits with status 2 after writing the report."""
        failing = {
            "toy": {
                "result": "FAIL",
                "summary": (1, 0, 1, 0),
                "checks": {"check_a": {"status": "FAIL", "message": "nope", "time": 0}},
                "rows": [],
            }
        }
        with mock.patch("cli.base.run_battery", return_value=failing):
            with self.assertRaises(CommandError) as ctx:
                self.call("lab", "--pdf")
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertTrue((self.out / "summary.json").exists())
        self.assertTrue((self.out / "report.pdf").read_bytes().startswith(b"%PDF"))
        self.assertIn(str(self.out / "report.pdf"), self.manifest()["outputs"])


class CommandTests(CommandTestCase):
    def test_gtilde(self):
        """G~(1) is 1 for t^2 and 1/2 for t^2 / 2 in 1D."""
        self.assertEqual(self.call("gtilde", "--family", "powerp:2", "--dim", "1").strip(), "1.0")
        self.assertEqual(self.call("gtilde", "--family", "power:2", "--a", "1.0").strip(), "0.5")
        manifest = self.manifest()
        self.assertEqual(manifest["command"], "gtilde")
        self.assertEqual(len(manifest["config_sha"]), 64)
        self.assertEqual(manifest["grid"], {"n": 1, "L": 8.0, "N": 256})
        self.assertEqual(manifest["family"], "power:2")
        self.assertIsNone(manifest["s_ladder"])
        self.assertIn(str(self.out / "gtilde.csv"), manifest["outputs"])
        self.assertIsInstance(manifest["wall_ms"], int)

    def test_modular_trace(self):
        """One trace row per order for fractional kinds, one for local kinds."""
        self.call("modular", "--kind", "IG", "--N", "64")
        rows = self.rows("modular.csv")
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]["kind"], "IG")
        self.call("modular", "--kind", "IsGA", "--N", "64", "--s-ladder", "0.5,0.9",
                  "--potential", "const:1")
        rows = self.rows("modular.csv")
        self.assertEqual([r["s"] for r in rows], ["0.5", "0.9"])
        self.assertTrue(all(float(r["value"]) > 0 for r in rows))
        self.assertEqual(self.manifest()["s_ladder"], [0.5, 0.9])

    def test_bbm(self):
        """The sweep writes one row per order and its summary."""
        self.call("bbm", "--N", "64", "--s-ladder", "0.6,0.7,0.8")
        self.assertEqual(len(self.rows("bbm.csv")), 3)
        summary = json.loads((self.out / "bbm.json").read_text())
        self.assertGreater(summary["target"], 0)

    def test_pointwise(self):
        """The pointwise limits are written with their targets."""
        self.call("pointwise", "--N", "64", "--x", "0.5", "--s-ladder", "0.6,0.7,0.8")
        self.assertEqual(len(self.rows("pointwise.csv")), 3)
        summary = json.loads((self.out / "pointwise.json").read_text())
        self.assertEqual(summary["point"], [0.5])

    def test_solve_local_oracle(self):
        """-u'' = 1 on (-1, 1) with Phi = t^2 / 2 has minimum -1/3."""
        output = self.call(
            "solve", "--local", "--family", "powerp_half:2", "--f", "const:1",
            "--omega", "-1:1", "--N", "256",
        )
        energy = float(output.split()[1])
        self.assertAlmostEqual(energy, -1.0 / 3.0, delta=1e-3)
        self.assertTrue((self.out / "solution.csv").exists())
        self.assertTrue(json.loads((self.out / "solve.json").read_text())["converged"])

    def test_solve_tilde_needs_local(self):
        """--tilde without --local is an input error."""
        with self.assertRaises(CommandError) as ctx:
            self.call("solve", "--tilde", "--N", "32")
        self.assertEqual(ctx.exception.returncode, 1)

    def test_gamma(self):
        """gamma writes one row per order and the report of both sides."""
        output = self.call(
            "gamma", "--N", "64", "--u", "const:0", "--s-ladder", "0.6,0.7,0.8"
        )
        self.assertEqual([r["k"] for r in self.rows("gamma.csv")], ["1", "2", "3"])
        report = json.loads((self.out / "gamma.json").read_text())
        self.assertTrue(report["passed"])
        self.assertEqual(report["tail_min"], 0.0)
        self.assertIn("tail min", output)

    def test_gamma_failure(self):
        """A failing liminf side exits with status 2."""
        failed = GammaReport(
            sequence="mollified",
            s_ladder=[0.8, 0.9, 0.95],
            values=[1.0, 0.8, 0.9],
            distances=[0.1, 0.05, 0.01],
            target=1.0,
            tail_min=0.8,
            liminf_gap=-0.2,
            extrapolated=0.95,
            limsup_gap=0.05,
            extrapolated_margin=-0.05,
        )
        with mock.patch("cli.management.commands.gamma.gamma_check", return_value=failed):
            with self.assertRaises(CommandError) as ctx:
                self.call("gamma", "--N", "64", "--sequence", "mollified")
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertTrue((self.out / "gamma.csv").exists())

    def test_study(self):
        """The study writes one row per order, with gauge residuals when asked."""
        output = self.call(
            "study", "--N", "32", "--s-ladder", "0.6,0.7,0.8", "--gauge-shift", "0.5"
        )
        rows = self.rows("study.csv")
        self.assertEqual([r["s"] for r in rows], ["0.6", "0.7", "0.8"])
        self.assertTrue(all(float(r["gauge_residual"]) < 1e-6 for r in rows))
        report = json.loads((self.out / "study.json").read_text())
        self.assertNotIn("energies_monotone", report["checks"])
        self.assertIn("energies_monotone", report["diagnostics"])
        self.assertIn("energies_monotone:", output)

    def test_lab_suite(self):
        """A passing lab suite exits normally and writes its CSV and summary."""
        output = self.call("lab", "--suite", "scaling", "--N", "64")
        self.assertIn("scaling: PASS", output)
        self.assertEqual(json.loads((self.out / "summary.json").read_text())["result"], "PASS")

    def test_selftest_threads(self):
        """selftest reports are identical for 1 and 4 threads."""
        reports = []
        for threads in ("1", "4"):
            self.call("selftest", "--fast", "--suite", "diamagnetic", "--threads", threads)
            self.assertEqual(self.manifest()["grid"]["N"], 64)
            reports.append(
                [(self.out / name).read_bytes() for name in ("summary.json", "diamagnetic.csv")]
            )
        self.assertEqual(reports[0], reports[1])
