import math

import numpy as np
from django.test import SimpleTestCase

from orliczlab.exceptions import (
    ConsistencyError,
    DegenerateFunctionError,
    DomainError,
    InputError,
    IntegrabilityError,
)

from .families import (
    BlendOrlicz,
    PowerOrlicz,
    PurePowerOrlicz,
    delta2_constant,
    estimate_indices,
    legendre_transform,
    parse_family,
)
from .properties import (
    convexity_defect,
    cotas_violation,
    monotonicity_defect,
    random_pairs,
    young_violation,
)
from .spherical import SphericalLimit, spherical_limit

BUILTINS = ["power:2", "power:1.5", "powerp:3", "blend:2:4", "blend:1.5:3"]


class EvaluateTests(SimpleTestCase):
    def test_power_values(self):
        """t^2/2 at 3 gives (4.5, 3)."""
        self.assertEqual(PowerOrlicz(2).evaluate(3.0), (4.5, 3.0))

    def test_zero(self):
        """Every family vanishes at 0 together with its density."""
        for spec in BUILTINS:
            self.assertEqual(parse_family(spec).evaluate(0.0), (0.0, 0.0), spec)

    def test_blend_values(self):
        """t^2 + t^4 at 1 gives (2, 6)."""
        self.assertEqual(BlendOrlicz(2, 4).evaluate(1.0), (2.0, 6.0))

    def test_invalid_arguments(self):
        """Negative t is a domain error, NaN an input error."""
        F = PowerOrlicz(2)
        with self.assertRaises(DomainError):
            F.evaluate(-1.0)
        with self.assertRaises(InputError):
            F.evaluate(float("nan"))

    def test_parse_family(self):
        """Config names map to the right classes; powerp_half is t^p/p."""
        self.assertEqual(parse_family("powerp_half:2"), PowerOrlicz(2))
        self.assertIsInstance(parse_family("powerp:2"), PurePowerOrlicz)
        self.assertEqual(parse_family("blend:2:4").name, "blend:2:4")
        for bad in ["exp:1", "power", "power:1", "blend:4:2", "power:x"]:
            with self.assertRaises(InputError):
                parse_family(bad)

    def test_quadratic_flag(self):
        """Only the exponent-2 powers split |z| exactly into real and imaginary parts."""
        z = np.array([3.0 + 4.0j, -1.0 + 2.0j, 0.5j])
        for spec in BUILTINS + ["powerp:2"]:
            F = parse_family(spec)
            split = F.G(np.abs(z.real)) + F.G(np.abs(z.imag))
            exact = np.allclose(split, F.G(np.abs(z)), rtol=1e-12)
            self.assertEqual(F.quadratic, exact, spec)
        self.assertEqual([parse_family(s).quadratic for s in ("power:2", "powerp:2")], [True] * 2)


class DerivedQuantityTests(SimpleTestCase):
    def test_legendre_closed_forms(self):
        """(t^2/2)* (1) = 1/2, (t^3/3)* (8) = (2/3) 8^{3/2}, G*(0) = 0."""
        self.assertAlmostEqual(legendre_transform(PowerOrlicz(2), 1.0), 0.5, places=10)
        self.assertAlmostEqual(
            legendre_transform(PowerOrlicz(3), 8.0), 8.0**1.5 * 2.0 / 3.0, places=9
        )
        self.assertAlmostEqual(8.0**1.5 * 2.0 / 3.0, 15.0849, places=4)
        self.assertEqual(legendre_transform(BlendOrlicz(2, 4), 0.0), 0.0)
        with self.assertRaises(DomainError):
            legendre_transform(PowerOrlicz(2), -1.0)

    def test_indices(self):
        """Lieberman indices of the built-ins match the declared exponents."""
        for F, expected in [
            (PowerOrlicz(2), (2.0, 2.0)),
            (PowerOrlicz(3), (3.0, 3.0)),
            (BlendOrlicz(2, 4), (2.0, 4.0)),
        ]:
            low, high = estimate_indices(F)
            self.assertAlmostEqual(low, expected[0], delta=1e-8)
            self.assertAlmostEqual(high, expected[1], delta=1e-8)

    def test_delta2(self):
        """Doubling constants are 4, 8 and 16, never above 2^p_plus."""
        for F, expected in [
            (PowerOrlicz(2), 4.0),
            (PowerOrlicz(3), 8.0),
            (BlendOrlicz(2, 4), 16.0),
        ]:
            C = delta2_constant(F)
            self.assertAlmostEqual(C, expected, delta=1e-8)
            self.assertLessEqual(C, F.delta2_C + 1e-8)

    def test_grid_validation(self):
        """Empty or narrow grids and degenerate functions are rejected."""
        with self.assertRaises(InputError):
            estimate_indices(PowerOrlicz(2), [])
        with self.assertRaises(InputError):
            estimate_indices(PowerOrlicz(2), np.linspace(1.0, 10.0, 20))

        class Vanishing(PowerOrlicz):
            def G(self, t):
                return np.where(t < 1.0, 0.0, super().G(t))

        with self.assertRaises(DegenerateFunctionError):
            delta2_constant(Vanishing(2))


class PropertyTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(20240917)
        self.t = np.logspace(-4, 4, 401)

    def test_convex_and_monotone(self):
        """Midpoint convexity and monotonicity hold on a log grid."""
        for spec in BUILTINS:
            F = parse_family(spec)
            self.assertLessEqual(convexity_defect(F, self.t), 1e-12, spec)
            self.assertLessEqual(monotonicity_defect(F, self.t), 0.0, spec)

    def test_cotas(self):
        """G(ab) lies between the power envelopes of a for 10^4 random pairs."""
        for spec in BUILTINS:
            a, b = random_pairs(self.rng, 10_000)
            self.assertLessEqual(cotas_violation(parse_family(spec), a, b), 1e-10, spec)

    def test_young(self):
        """s t <= G(t) + G*(s) on random samples."""
        for spec in ["power:2", "blend:2:4"]:
            s, t = random_pairs(self.rng, 500, low=-2.0, high=2.0)
            self.assertLessEqual(young_violation(parse_family(spec), s, t), 1e-10, spec)


class SphericalLimitTests(SimpleTestCase):
    def test_power_closed_forms(self):
        """G = t^2 gives 1 in 1D and pi/2 in 2D at a = 1."""
        self.assertAlmostEqual(spherical_limit(PurePowerOrlicz(2), 1, 1.0), 1.0, places=12)
        self.assertAlmostEqual(
            spherical_limit(PurePowerOrlicz(2), 2, 1.0), math.pi / 2, places=10
        )
        self.assertAlmostEqual(
            spherical_limit(PowerOrlicz(2), 1, 3.0, verify=False), 4.5, places=12
        )

    def test_zero(self):
        """G~(0) = 0 for every family and dimension."""
        for spec in BUILTINS:
            for n in (1, 2):
                self.assertEqual(spherical_limit(parse_family(spec), n, 0.0), 0.0)

    def test_s_independence(self):
        """The raw integral at s = 0.5, 0.7, 0.9 matches the substituted form."""
        for spec in BUILTINS:
            for n in (1, 2):
                limit = SphericalLimit(parse_family(spec), n)
                for a in (0.3, 1.0, 2.5):
                    target = float(limit.value(a))
                    for s in (0.5, 0.7, 0.9):
                        raw = limit.raw_value(a, s)
                        self.assertLess(abs(raw - target) / target, 1e-6, (spec, n, a, s))

    def test_closed_form_matches_quadrature(self):
        """The log-primitive route agrees with direct quadrature."""
        for spec in BUILTINS:
            limit = SphericalLimit(parse_family(spec), 2)
            a = np.array([0.1, 1.0, 7.0])
            np.testing.assert_allclose(limit.closed_form(a), limit.value(a), rtol=1e-10)

    def test_sandwich_and_table(self):
        """c1 G <= G~ <= c2 G with finite positive constants."""
        limit = SphericalLimit(BlendOrlicz(2, 4), 2)
        c1, c2 = limit.equivalence_constants()
        self.assertGreater(c1, 0.0)
        self.assertLessEqual(c1, c2)
        self.assertTrue(math.isfinite(c2))
        rows = limit.table()
        self.assertEqual(set(rows[0]), {"t", "G", "Gtilde", "ratio"})

    def test_tabulated_matches(self):
        """The tabulated G~ reproduces values and derivatives of the quadrature."""
        limit = SphericalLimit(BlendOrlicz(1.5, 3), 1)
        table = limit.as_orlicz()
        t = np.array([1e-9, 3e-3, 0.7, 2.0, 40.0, 1e7])
        np.testing.assert_allclose(table.G(t), limit.value(t), rtol=1e-3)
        np.testing.assert_allclose(table.g(t), limit.derivative(t), rtol=1e-3)
        self.assertLessEqual(convexity_defect(table, np.logspace(-6, 6, 301)), 1e-9)

    def test_errors(self):
        """Bad dimension, negative argument and p_minus <= 1 are rejected."""
        with self.assertRaises(DomainError):
            spherical_limit(PowerOrlicz(2), 3, 1.0)
        with self.assertRaises(DomainError):
            spherical_limit(PowerOrlicz(2), 1, -1.0)

        class Linearish(PowerOrlicz):
            @property
            def p_minus(self):
                return 1.0

        with self.assertRaises(IntegrabilityError):
            spherical_limit(Linearish(2), 1, 1.0)

    def test_verify_detects_mismatch(self):
        """A corrupted substituted form fails the raw cross-check."""
        limit = SphericalLimit(PowerOrlicz(2), 1)
        original = limit.raw_value

        def raw_value(a, s):
            return original(a, s) * 1.01

        limit.raw_value = raw_value
        with self.assertRaises(ConsistencyError):
            limit.verify(1.0)
