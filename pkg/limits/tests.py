import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from fields.grid import Grid, GridField
from fields.operators import gauge_transform
from fields.potentials import MagneticPotential
from fields.samples import sample
from modulars.config import QuadratureConfig
from orlicz.families import parse_family
from orliczlab.exceptions import InputError, PreconditionError

from .bbm import (
    bbm_sweep,
    check_ladder,
    divergence_smoke,
    extrapolate,
    pointwise_bbm,
    pointwise_consistency,
    refinement_check,
    scaled_ladder,
)
from .gamma import gamma_check, sequence_terms

QUADRATIC = parse_family("power:2")
SHORT_LADDER = (0.8, 0.9, 0.95)


class LadderTests(SimpleTestCase):
    def test_extrapolate_affine(self):
        """An affine sequence in (1 - s) extrapolates to its intercept."""
        ladder = [0.6, 0.7, 0.8, 0.9]
        values = [2.0 + 3.0 * (1 - s) for s in ladder]
        self.assertAlmostEqual(extrapolate(ladder, values), 2.0, places=12)

    def test_check_ladder(self):
        """Ladders must be increasing, long enough and inside [0.5, 0.97]."""
        self.assertEqual(check_ladder((0.6, 0.7, 0.8)), [0.6, 0.7, 0.8])
        for ladder in [(0.6, 0.7), (0.7, 0.6, 0.8), (0.4, 0.6, 0.8), (0.6, 0.8, 0.99)]:
            with self.assertRaises(InputError):
                check_ladder(ladder)


class BBMSweepTests(SimpleTestCase):
    def setUp(self):
        self.cfg = QuadratureConfig()

    def test_zero_field(self):
        """u = 0: all scaled values and the target are 0."""
        grid = Grid(1, 4.0, 128)
        u = GridField(grid, np.zeros(grid.shape), 1.0)
        result = bbm_sweep(QUADRATIC, u, MagneticPotential.constant([1.0]), SHORT_LADDER, self.cfg)
        self.assertEqual(result.scaled_values, [0.0, 0.0, 0.0])
        self.assertEqual(result.target, 0.0)
        self.assertEqual(result.rel_gap, 0.0)

    def test_power_case(self):
        """G = t^2/2, A = 0, gaussian(1): the limit is sqrt(pi/2) / 2 within 2%."""
        grid = Grid(1, 8.0, 2048)
        u = sample("gaussian:1", grid)
        result = bbm_sweep(QUADRATIC, u, MagneticPotential.zero(1), cfg=self.cfg)
        expected = 0.5 * math.sqrt(math.pi / 2)
        self.assertAlmostEqual(result.target / expected, 1.0, delta=1e-3)
        self.assertLess(result.rel_gap, 0.02)
        self.assertTrue(all(math.isfinite(v) for v in result.scaled_values))
        self.assertTrue(math.isfinite(result.bound_ratio) and result.bound_ratio > 0)

    def test_magnetic_case(self):
        """A = 1: the limit is (1/2) integral (u'^2 + u^2) = sqrt(pi/2) within 2%."""
        grid = Grid(1, 8.0, 2048)
        u = sample("gaussian:1", grid)
        result = bbm_sweep(QUADRATIC, u, MagneticPotential.constant([1.0]), cfg=self.cfg)
        self.assertAlmostEqual(result.target / math.sqrt(math.pi / 2), 1.0, delta=1e-3)
        self.assertLess(result.rel_gap, 0.02)

    def test_two_dimensions(self):
        """n = 2, G = t^2/2, bump: the sweep lands within 5% of its target."""
        grid = Grid(2, 2.0, 96)
        u = sample("bump:1", grid)
        result = bbm_sweep(QUADRATIC, u, MagneticPotential.zero(2), cfg=self.cfg)
        self.assertLess(result.rel_gap, 0.05)

    def test_gauge_shift(self):
        """A constant gauge shift leaves the sweep unchanged."""
        grid = Grid(1, 4.0, 256)
        u = sample("bump:1", grid)
        A = MagneticPotential.constant([0.5])
        base = bbm_sweep(QUADRATIC, u, A, SHORT_LADDER, self.cfg)
        v, B = gauge_transform(u, A, 1.0)
        shifted = bbm_sweep(QUADRATIC, v, B, SHORT_LADDER, self.cfg)
        np.testing.assert_allclose(shifted.scaled_values, base.scaled_values, rtol=1e-8)
        self.assertAlmostEqual(shifted.target / base.target, 1.0, delta=1e-8)

    def test_gauge_shift_from_zero_potential(self):
        """Shifting A = 0 to a constant leaves the quadratic sweep unchanged."""
        grid = Grid(1, 8.0, 256)
        u = sample("gaussian:1", grid)
        zero = MagneticPotential.zero(1)
        base = bbm_sweep(QUADRATIC, u, zero, SHORT_LADDER, self.cfg)
        for c in (0.5, 1.0):
            v, B = gauge_transform(u, zero, c)
            shifted = bbm_sweep(QUADRATIC, v, B, SHORT_LADDER, self.cfg)
            np.testing.assert_allclose(shifted.scaled_values, base.scaled_values, rtol=1e-8)
            self.assertAlmostEqual(shifted.target / base.target, 1.0, delta=1e-8)

    def test_worker_count_does_not_change_result(self):
        """Running the ladder on threads reproduces the serial sweep bitwise."""
        grid = Grid(1, 4.0, 128)
        u = sample("phase:1:bump:1", grid)
        A = MagneticPotential.constant([1.0])
        one = bbm_sweep(QUADRATIC, u, A, SHORT_LADDER, self.cfg)
        four = bbm_sweep(QUADRATIC, u, A, SHORT_LADDER, self.cfg.with_options(workers=4))
        self.assertEqual(one.scaled_values, four.scaled_values)

    def test_refinement(self):
        """At fixed s the scaled values move toward the N = 2048 values when N doubles."""

        def build(grid):
            return sample("gaussian:1", grid), MagneticPotential.zero(1)

        coarse, fine = refinement_check(
            QUADRATIC, build, Grid(1, 8.0, 256), SHORT_LADDER, self.cfg
        )
        reference, _ = scaled_ladder(QUADRATIC, *build(Grid(1, 8.0, 2048)), SHORT_LADDER, self.cfg)
        for s, c, f, r in zip(SHORT_LADDER, coarse.scaled_values, fine.scaled_values, reference):
            self.assertLessEqual(abs(f - r), abs(c - r) + 1e-12 * r, s)

    def test_jump_grows_under_refinement(self):
        """A step field is outside the limit space; its scaled values grow with N."""

        def build(grid):
            return sample("step:0.5", grid), MagneticPotential.zero(1)

        report = divergence_smoke(QUADRATIC, build, Grid(1, 2.0, 128), SHORT_LADDER, self.cfg)
        self.assertTrue(report["growing"])
        self.assertGreater(report["growth"][-1], 1.3)


class PointwiseTests(SimpleTestCase):
    def setUp(self):
        self.cfg = QuadratureConfig()
        self.grid = Grid(1, 8.0, 1024)

    def test_gaussian_at_one(self):
        """G = t^2, gaussian(1), x = 1: the Re limit is u'(1)^2 = 4 e^-2."""
        u = sample("gaussian:1", self.grid)
        result = pointwise_bbm(
            parse_family("powerp:2"), u, MagneticPotential.zero(1), 1.0, cfg=self.cfg
        )
        expected = 4 * math.exp(-2)
        self.assertAlmostEqual(result.re_target / expected, 1.0, delta=1e-3)
        self.assertAlmostEqual(result.re_limit / expected, 1.0, delta=0.02)
        self.assertEqual(result.im_limit, 0.0)
        self.assertEqual(result.im_target, 0.0)

    def test_far_from_support(self):
        """Far away from the support both limits vanish."""
        u = sample("bump:1", self.grid)
        result = pointwise_bbm(QUADRATIC, u, MagneticPotential.constant([1.0]), 6.0, cfg=self.cfg)
        self.assertLess(abs(result.re_limit), 1e-3)
        self.assertLess(abs(result.im_limit), 1e-3)

    def test_point_must_be_a_node(self):
        """x off the grid is an input error."""
        u = sample("bump:1", self.grid)
        with self.assertRaises(InputError):
            pointwise_bbm(QUADRATIC, u, MagneticPotential.zero(1), 20.0, cfg=self.cfg)

    def test_consistency_with_global_target(self):
        """The grid integral of the pointwise targets is the global target within 1%."""
        for A in (MagneticPotential.zero(1), MagneticPotential.constant([1.0])):
            u = sample("phase:0.5:gaussian:1", self.grid)
            integral, target, gap = pointwise_consistency(QUADRATIC, u, A)
            self.assertLess(gap, 0.01)
            self.assertGreater(target, 0.0)


class GammaTests(SimpleTestCase):
    def setUp(self):
        self.cfg = QuadratureConfig()
        self.grid = Grid(1, 2.0, 512)
        self.u = sample("bump:1", self.grid)

    def test_zero_field(self):
        """u = 0 with the constant sequence: every gap is 0."""
        u = GridField(self.grid, np.zeros(self.grid.shape), 1.0)
        zero = MagneticPotential.zero(1)
        report = gamma_check(QUADRATIC, zero, u, "constant", SHORT_LADDER, self.cfg)
        self.assertEqual(report.limsup_gap, 0.0)
        self.assertEqual(report.liminf_gap, 0.0)
        self.assertEqual(report.tail_min, 0.0)
        self.assertTrue(report.passed)

    def test_constant_sequence(self):
        """The recovery sequence u_k = u reaches J(u) within the sweep tolerance."""
        report = gamma_check(QUADRATIC, MagneticPotential.constant([1.0]), self.u, cfg=self.cfg)
        self.assertLess(report.limsup_gap, 0.03)
        self.assertEqual(report.distances, [0.0] * 6)
        self.assertEqual(report.tail_min, min(report.values[-3:]))

    def test_mollified_sequence(self):
        """eps_k = 2^-k on a gaussian: every tail value stays above J(u) - tolerance."""
        grid = Grid(1, 8.0, 2048)
        u = sample("gaussian:1", grid)
        report = gamma_check(QUADRATIC, MagneticPotential.zero(1), u, "mollified", cfg=self.cfg)
        self.assertTrue(report.passed, report.as_dict())
        for value in report.values[-3:]:
            self.assertGreaterEqual(value, (1.0 - report.tolerance) * report.target)
        self.assertLess(report.distances[-1], report.distances[0])

    def test_truncated_sequence(self):
        """Truncations at radii (1 - 2^-k) R approach u and keep the liminf side."""
        terms = sequence_terms(self.u, "truncated", 4)
        self.assertEqual(len(terms), 4)
        grid = Grid(1, 8.0, 2048)
        u = sample("gaussian:1", grid)
        report = gamma_check(QUADRATIC, MagneticPotential.zero(1), u, "truncated", cfg=self.cfg)
        self.assertTrue(report.passed, report.as_dict())
        self.assertGreaterEqual(report.liminf_gap, -report.tolerance)

    def test_tail_minimum_decides(self):
        """One low tail value fails the liminf side; the extrapolated margin is only reported."""
        values = [1.3, 1.2, 1.1, 1.0, 0.9, 1.0]
        with mock.patch("limits.gamma.ladder_map", return_value=values), mock.patch(
            "limits.gamma.bbm_target", return_value=1.0
        ):
            report = gamma_check(
                QUADRATIC, MagneticPotential.zero(1), self.u, "constant", cfg=self.cfg
            )
        self.assertEqual(report.tail_min, 0.9)
        self.assertAlmostEqual(report.liminf_gap, -0.1, places=12)
        limit = extrapolate(report.s_ladder, values)
        self.assertAlmostEqual(report.extrapolated_margin, limit - 1.0)
        self.assertFalse(report.liminf_holds)
        self.assertFalse(report.passed)

    def test_non_recovery_sequence_skips_limsup(self):
        """The limsup gap only gates the constant sequence."""
        values = [1.3, 1.25, 1.2, 1.15, 1.12, 1.1]
        with mock.patch("limits.gamma.ladder_map", return_value=values), mock.patch(
            "limits.gamma.bbm_target", return_value=1.0
        ), mock.patch("limits.gamma.luxemburg_distance", return_value=0.0):
            constant = gamma_check(
                QUADRATIC, MagneticPotential.zero(1), self.u, "constant", cfg=self.cfg
            )
            truncated = gamma_check(
                QUADRATIC, MagneticPotential.zero(1), self.u, "truncated", cfg=self.cfg
            )
        self.assertGreater(constant.limsup_gap, 0.03)
        self.assertFalse(constant.passed)
        self.assertTrue(truncated.passed)

    def test_non_convergent_sequence(self):
        """A sequence that stays away from u is a precondition failure."""
        doubled = [self.u.scaled(2.0)] * 3
        with mock.patch("limits.gamma.sequence_terms", return_value=doubled):
            with self.assertRaises(PreconditionError) as ctx:
                gamma_check(
                    QUADRATIC, MagneticPotential.zero(1), self.u, "constant", SHORT_LADDER, self.cfg
                )
        self.assertGreater(ctx.exception.distance, 0.0)

    def test_unknown_sequence(self):
        """Only the built-in sequences are accepted."""
        with self.assertRaises(InputError):
            sequence_terms(self.u, "random", 3)
