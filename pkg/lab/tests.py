import csv
import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from fields.grid import Domain, Grid
from fields.potentials import MagneticPotential
from fields.samples import sample
from modulars.config import QuadratureConfig
from modulars.fractional import modular_IsGA
from modulars.local import modular_IG
from orlicz.families import parse_family
from orliczlab.exceptions import InputError

from .fixtures import builtin_fields, builtin_pairs, domain_fields, unit_domain
from .inequalities import (
    diamagnetic_check,
    fractional_poincare_constant,
    gauge_pair_ratio,
    lemma_ratios,
    local_diamagnetic_check,
    poincare_check,
    scaling_check,
)
from .report import summarize, write_pdf, write_report
from .runner import battery_passed, run_battery
from .suites import get_suite_classes
from .suites.base import (
    ROW_COLUMNS,
    DependencyException,
    LabSuite,
    ParameterMissingException,
    UnknownParameterException,
    depends_on,
    skip,
    skip_when,
)
from .suites.lemmas import load_ceilings
from .suites.selftest import GammaSuite, ModularInvariantSuite, StudySuite

QUADRATIC = parse_family("power:2")
SQUARE = parse_family("powerp:2")
SEED = 20240917
SHORT_LADDER = (0.8, 0.9)


class ToySuite(LabSuite):
    name = "toy"
    _params = [{"name": "value"}, {"name": "flag", "requirement": "optional"}]

    def check_a(self):
        return self.record("a", 1.0, 2.0, True)

    @depends_on("check_a")
    def check_b(self):
        return self.value > 0

    @depends_on("check_b")
    def check_c(self):
        return "fine"

    @skip("not today")
    def check_d(self):
        return True

    @depends_on("check_d")
    def check_e(self):
        return True

    @skip_when(lambda suite: getattr(suite, "flag", False), "flag set")
    def check_f(self):
        raise ValueError("boom")

    def check_g(self):
        return 3


class CycleSuite(LabSuite):
    _params = []

    @depends_on("check_y")
    def check_x(self):
        return True

    @depends_on("check_x")
    def check_y(self):
        return True


class BrokenSetupSuite(LabSuite):
    _params = []

    def _setup(self):
        raise RuntimeError("no grid")

    def check_a(self):
        return True


class SuiteFrameworkTests(SimpleTestCase):
    def test_statuses(self):
        """Checks pass, fail, skip and propagate failed dependencies."""
        output = ToySuite().run(value=-1)
        checks = output["checks"]
        self.assertEqual(checks["check_a"]["status"], "PASS")
        self.assertEqual(checks["check_b"]["status"], "FAIL")
        self.assertEqual(checks["check_c"]["status"], "SKIPPED")
        self.assertEqual(checks["check_d"]["status"], "SKIPPED")
        self.assertEqual(checks["check_d"]["message"], "not today")
        self.assertEqual(checks["check_e"]["status"], "SKIPPED")
        self.assertEqual(checks["check_f"]["status"], "FAIL")
        self.assertEqual(checks["check_f"]["message"], "boom")
        self.assertEqual(checks["check_g"]["status"], "FAIL")
        self.assertEqual(output["result"], "FAIL")
        self.assertEqual(output["summary"], (7, 1, 3, 3))

    def test_string_and_skip_when(self):
        """A string return passes with its message; skip_when reads the parameters."""
        output = ToySuite().run(value=1, flag=True)
        self.assertEqual(output["checks"]["check_c"]["status"], "PASS")
        self.assertEqual(output["checks"]["check_c"]["message"], "fine")
        self.assertEqual(output["checks"]["check_f"]["status"], "SKIPPED")

    def test_rows(self):
        """record adds a row with the lhs / rhs ratio."""
        output = ToySuite().run(value=1)
        self.assertEqual(len(output["rows"]), 1)
        row = output["rows"][0]
        self.assertEqual(tuple(row), ROW_COLUMNS)
        self.assertEqual(float(row["ratio"]), 0.5)

    def test_parameters(self):
        """Missing and unknown parameters are rejected."""
        with self.assertRaises(ParameterMissingException):
            ToySuite().run()
        with self.assertRaises(UnknownParameterException):
            ToySuite().run(value=1, other=2)
        self.assertEqual(ToySuite.accepted({"value": 1, "grid": None}), {"value": 1})

    def test_cycle(self):
        """Cyclic dependencies are reported."""
        with self.assertRaises(DependencyException):
            CycleSuite().run()

    def test_setup_failure(self):
        """A failing setup fails every check."""
        output = BrokenSetupSuite().run()
        self.assertEqual(output["result"], "FAIL")
        self.assertEqual(output["checks"]["check_a"]["message"], "no grid")

    def test_registry(self):
        """The lab battery holds the inequality suites; selftest adds the invariants."""
        lab = get_suite_classes("lab")
        self.assertEqual(list(lab), ["diamagnetic", "lemma_ratios", "poincare", "scaling"])
        selftest = get_suite_classes("selftest")
        self.assertTrue(set(lab) < set(selftest))
        self.assertIn("orlicz_invariants", selftest)
        self.assertTrue({"bbm", "gamma", "study", "solver"} <= set(selftest))


class SelftestSuiteTests(SimpleTestCase):
    def test_gamma_suite(self):
        """The fast Gamma suite passes with one tail row per sequence and tail order."""
        output = GammaSuite().run(cfg=QuadratureConfig(), fast=True)
        self.assertEqual(output["result"], "PASS", output["checks"])
        tails = [row for row in output["rows"] if row["check"].endswith(":tail")]
        self.assertEqual(len(tails), 9)
        self.assertTrue(all(row["pass"] for row in tails))

    def test_modular_gauge_blend(self):
        """blend:2:4 passes the modular gauge check in the modulus form, from A and from 0."""
        output = ModularInvariantSuite().run(
            orlicz=parse_family("blend:2:4"),
            grid=Grid(1, 2.0, 64),
            A=MagneticPotential.constant([1.0]),
            s_ladder=SHORT_LADDER,
            cfg=QuadratureConfig(),
            seed=SEED,
        )
        self.assertEqual(output["checks"]["check_gauge_covariance"]["status"], "PASS")
        labels = {row["check"] for row in output["rows"]}
        self.assertTrue({"gauge:A+2", "gauge:0+2", "gauge_local:0+0.5"} <= labels)

    def test_study_suite(self):
        """The study suite passes and reports the energy trend without failing on it."""
        output = StudySuite().run(cfg=QuadratureConfig(workers=2), fast=True)
        self.assertEqual(output["result"], "PASS", output["checks"])
        trend = output["checks"]["check_energy_trend"]
        self.assertEqual(trend["status"], "PASS")
        self.assertEqual(trend["message"], "energies_monotone=False")


class DiamagneticTests(SimpleTestCase):
    def test_builtin_pairs(self):
        """No violations for the built-in pairs at s = 0.3, 0.6, 0.9."""
        grid = Grid(1, 2.0, 64)
        for label, u, A in builtin_pairs(grid, SEED):
            for s in (0.3, 0.6, 0.9):
                with self.subTest(label=label, s=s):
                    report = diamagnetic_check(u, A, s)
                    self.assertEqual(report.violations, 0)
                    self.assertGreater(report.pairs, 0)

    def test_two_dimensional(self):
        """No violations on a 2D grid with a shear potential."""
        grid = Grid(2, 2.0, 16)
        u = builtin_fields(grid, SEED)["random"]
        A = MagneticPotential.shear([[0.0, -0.5], [0.5, 0.0]], grid)
        self.assertTrue(diamagnetic_check(u, A, 0.6).passed)
        self.assertTrue(local_diamagnetic_check(u, A).passed)

    def test_equality_and_strictness(self):
        """Real nonnegative fields give equalities; a phase makes some pairs strict."""
        grid = Grid(1, 2.0, 64)
        fields = builtin_fields(grid, SEED)
        zero = MagneticPotential.zero(1)
        self.assertEqual(diamagnetic_check(fields["gaussian"], zero, 0.5).strict, 0)
        self.assertGreater(diamagnetic_check(fields["phase_gaussian"], zero, 0.5).strict, 0)

    def test_local(self):
        """The covariant central differences satisfy the local inequality exactly."""
        grid = Grid(1, 2.0, 128)
        for label, u, A in builtin_pairs(grid, SEED):
            with self.subTest(label=label):
                self.assertEqual(local_diamagnetic_check(u, A).violations, 0)


class PoincareTests(SimpleTestCase):
    def test_parabola(self):
        """G = t^2 and u = 1 - x^2 on (-1, 1): 16/15 <= 32/3 within 0.5%."""
        grid = Grid(1, 2.0, 1024)
        u = sample("parabola", grid)
        report = poincare_check(SQUARE, u, unit_domain(1), MagneticPotential.zero(1))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.left / (16.0 / 15.0), 1.0, delta=5e-3)
        self.assertAlmostEqual(report.gradient_side / (32.0 / 3.0), 1.0, delta=5e-3)

    def test_builtin_fields(self):
        """Both explicit forms hold for the built-in fields in 1D and 2D."""
        A_by_n = {1: MagneticPotential.constant([1.0]), 2: MagneticPotential.constant([1.0, -0.5])}
        for n, N in ((1, 256), (2, 48)):
            grid = Grid(n, 2.0, N)
            domain = unit_domain(n)
            for label, u in domain_fields(grid, domain).items():
                with self.subTest(n=n, label=label):
                    self.assertTrue(poincare_check(QUADRATIC, u, domain, A_by_n[n]).passed)

    def test_zero_field(self):
        """Both sides vanish for u = 0."""
        grid = Grid(1, 2.0, 64)
        zero = sample("bump:0.5", grid).scaled(0.0)
        report = poincare_check(QUADRATIC, zero, unit_domain(1), MagneticPotential.zero(1))
        self.assertEqual((report.left, report.gradient_side, report.magnetic_side), (0, 0, 0))

    def test_support_outside_domain(self):
        """A field leaking out of Omega is rejected."""
        grid = Grid(1, 2.0, 64)
        with self.assertRaises(InputError):
            poincare_check(
                QUADRATIC, sample("bump:1.5", grid), unit_domain(1), MagneticPotential.zero(1)
            )

    def test_fractional_constant(self):
        """At the empirical constant both sides of the fractional form agree."""
        grid = Grid(1, 2.0, 128)
        u = sample("bump:0.8", grid)
        A = MagneticPotential.constant([1.0])
        cfg = QuadratureConfig()
        s, d = 0.8, 2.0
        c = fractional_poincare_constant(QUADRATIC, u, A, s, d, cfg)
        self.assertTrue(math.isfinite(c) and c > 0)
        rhs = modular_IsGA(QUADRATIC, u.scaled((1 - s) * c * d**s), A, s, cfg).value
        self.assertAlmostEqual(rhs / modular_IG(QUADRATIC, u).value, 1.0, places=6)

    def test_custom_domain(self):
        """Fields for an off-centre box need the origin inside it."""
        grid = Grid(1, 2.0, 64)
        with self.assertRaises(InputError):
            domain_fields(grid, Domain((0.2,), (1.0,)))


class LemmaRatioTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid(1, 4.0, 128)
        self.u = builtin_fields(self.grid, SEED)["gaussian"]
        self.cfg = QuadratureConfig()

    def test_zero_field(self):
        """The zero field is a vacuous pass."""
        ratios = lemma_ratios(QUADRATIC, self.u.scaled(0.0), MagneticPotential.zero(1), 0.8)
        self.assertEqual(set(ratios.values()), {0.0})

    def test_finite_below_ceilings(self):
        """All four ratios are finite and below the default ceilings."""
        ceilings = load_ceilings("power:2")
        for s in (0.3, 0.8):
            ratios = lemma_ratios(QUADRATIC, self.u, MagneticPotential.zero(1), s, self.cfg)
            for name, value in ratios.items():
                with self.subTest(s=s, ratio=name):
                    self.assertTrue(math.isfinite(value))
                    self.assertLessEqual(value, ceilings[name])

    def test_gauge_pair(self):
        """r4 is unchanged by a constant gauge shift."""
        base, shifted = gauge_pair_ratio(
            QUADRATIC, self.u, MagneticPotential.constant([0.5]), 0.8, 1.0, self.cfg
        )
        self.assertAlmostEqual(shifted / base, 1.0, delta=1e-8)

    def test_gauge_pair_blend(self):
        """blend:2:4 compares r4 in the modulus form, which no constant shift changes."""
        F = parse_family("blend:2:4")
        for A in (MagneticPotential.zero(1), MagneticPotential.constant([0.5])):
            base, shifted = gauge_pair_ratio(F, self.u, A, 0.8, 1.0, self.cfg)
            self.assertAlmostEqual(shifted / base, 1.0, delta=1e-8)
            tilde = lemma_ratios(F, self.u, A, 0.8, self.cfg, tilde=True)["r4"]
            self.assertEqual(base, tilde)

    def test_homogeneous_scaling(self):
        """Ratios of a power function do not change under u -> alpha u."""
        A = MagneticPotential.constant([1.0])
        rows = scaling_check(QUADRATIC, self.u, A, 0.8, cfg=self.cfg)
        for row in rows:
            self.assertEqual(row["bound"], 1.0)
            self.assertAlmostEqual(row["change"], 1.0, delta=1e-9)

    def test_blend_scaling(self):
        """A blend stays within the power factors of alpha."""
        F = parse_family("blend:2:4")
        for row in scaling_check(F, self.u, MagneticPotential.zero(1), 0.8, cfg=self.cfg):
            self.assertLessEqual(row["change"], row["bound"])
            self.assertGreaterEqual(row["change"], 1.0 / row["bound"])

    def test_ceilings(self):
        """Unknown families use the defaults; a missing file is an input error."""
        self.assertEqual(load_ceilings("power:7"), load_ceilings("power:2"))
        with self.assertRaises(InputError):
            load_ceilings("power:2", path="/nonexistent/ceilings.json")
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "ceilings.json"
            path.write_text(json.dumps({"families": {"power:2": {"r1": 1.0}}}))
            with self.assertRaises(InputError):
                load_ceilings("power:2", path=path)


class BatteryTests(SimpleTestCase):
    def context(self, workers):
        grid = Grid(1, 2.0, 64)
        return {
            "orlicz": QUADRATIC,
            "grid": grid,
            "A": MagneticPotential.constant([0.5]),
            "s_ladder": SHORT_LADDER,
            "cfg": QuadratureConfig(workers=workers),
            "seed": SEED,
            "fast": True,
        }

    def test_lab_battery(self):
        """The lab battery passes and reports identically for 1 and 4 workers."""
        single = run_battery("lab", self.context(1), workers=1)
        threaded = run_battery("lab", self.context(4), workers=4)
        self.assertTrue(battery_passed(single))
        self.assertEqual(summarize(single), summarize(threaded))
        self.assertEqual(
            [o["rows"] for o in single.values()], [o["rows"] for o in threaded.values()]
        )

    def test_unknown_names(self):
        """Unknown batteries and suites are input errors."""
        with self.assertRaises(InputError):
            run_battery("nightly", self.context(1))
        with self.assertRaises(InputError):
            run_battery("lab", self.context(1), only=["nope"])

    def test_report_files(self):
        """CSV files carry the row columns; the summary and PDF are written."""
        results = run_battery("lab", self.context(1), only=["scaling"])
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp)
            paths = write_report(out, results)
            self.assertEqual([p.name for p in paths], ["scaling.csv", "summary.json"])
            with open(out / "scaling.csv") as f:
                self.assertEqual(tuple(csv.DictReader(f).fieldnames), ROW_COLUMNS)
            summary = json.loads((out / "summary.json").read_text())
            self.assertEqual(summary["result"], "PASS")
            self.assertNotIn("time", json.dumps(summary))
            pdf = write_pdf(out / "report.pdf", results, "Lab")
            self.assertTrue(pdf.read_bytes().startswith(b"%PDF"))

    def test_worst_ratio(self):
        """The summary reports the largest finite ratio of each suite."""
        results = {
            "toy": {
                "result": "PASS",
                "summary": (1, 1, 0, 0),
                "checks": {"check_a": {"status": "PASS", "message": "", "time": 0.1}},
                "rows": [{"ratio": "0.5"}, {"ratio": "inf"}, {"ratio": "0.75"}],
            }
        }
        self.assertEqual(summarize(results)["suites"]["toy"]["worst_ratio"], 0.75)
        self.assertTrue(np.isfinite(summarize(results)["suites"]["toy"]["worst_ratio"]))
