import math

import numpy as np
from django.test import SimpleTestCase

from fields.grid import Grid, GridField
from fields.operators import gauge_transform
from fields.potentials import MagneticPotential
from fields.samples import sample
from orlicz.families import parse_family
from orliczlab.exceptions import DomainError, InputError, SingularityError, StencilError

from .config import QuadratureConfig
from .fractional import FractionalQuadrature, active_box, modular_IsG, modular_IsGA
from .geometry import radial_rule, rectangle_rule
from .local import covariant_gradient, modular_IG, modular_IGA_local
from .luxemburg import evaluate_modular, luxemburg_norm
from .modulus import SPLIT, TILDE
from .quotient import holder_quotient

QUADRATIC = parse_family("power:2")


def random_field(grid, rng, radius=1.0):
    """Random complex values times a bump, so the field vanishes near the edges."""
    bump = sample(f"bump:{radius}", grid)
    noise = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return bump.with_values(noise * bump.values, label="random")


class QuotientTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid(1, 4.0, 64)

    def test_zero_numerator(self):
        """u(x) = u(y) = 0 gives 0."""
        u = GridField(self.grid, np.zeros(self.grid.shape), 1.0)
        A = MagneticPotential.constant([1.0])
        self.assertEqual(holder_quotient(u, A, 0.5, 0.0, 1.0), 0)

    def test_plain_difference(self):
        """A = 0, u(x) = 1, u(y) = 0 and |x - y| = 1 gives 1."""
        values = np.zeros(self.grid.shape)
        values[self.grid.index_of(0.0)] = 1.0
        u = GridField(self.grid, values, 0.5)
        A = MagneticPotential.zero(1)
        self.assertAlmostEqual(holder_quotient(u, A, 0.3, 0.0, 1.0), 1.0)

    def test_constant_potential_phase(self):
        """u(x) = u(y) = 1 and A = a give (1 - e^{i r a}) / r^s."""
        u = sample("const:1", self.grid)
        a, s = 0.7, 0.4
        A = MagneticPotential.constant([a])
        x, y = 1.0, -0.5
        r = x - y
        expected = (1 - np.exp(1j * r * a)) / r**s
        got = holder_quotient(u, A, s, x, y)
        self.assertAlmostEqual(got, expected, places=14)
        self.assertAlmostEqual(abs(got), 2 * abs(math.sin(r * a / 2)) / r**s, places=14)

    def test_modulus_symmetric(self):
        """|D(x, y)| = |D(y, x)| because the phase is unimodular."""
        rng = np.random.default_rng(1)
        u = random_field(self.grid, rng)
        A = MagneticPotential.shear([[0.8]], self.grid, offset=[0.3])
        for x, y in [(0.25, -0.5), (0.0, 0.75), (-0.125, 0.5)]:
            forward = holder_quotient(u, A, 0.6, x, y)
            backward = holder_quotient(u, A, 0.6, y, x)
            self.assertAlmostEqual(abs(forward), abs(backward), places=13)

    def test_errors(self):
        """The diagonal and s outside (0, 1) are rejected."""
        u = sample("bump:1", self.grid)
        A = MagneticPotential.zero(1)
        with self.assertRaises(SingularityError):
            holder_quotient(u, A, 0.5, 0.5, 0.5)
        with self.assertRaises(DomainError):
            holder_quotient(u, A, 1.0, 0.0, 0.5)


class GeometryTests(SimpleTestCase):
    def test_rectangle_rule_area(self):
        """Integrating rho^2 / 2 over the angle gives the rectangle area."""
        points = np.array([[0.1, -0.2], [0.0, 0.0], [0.9, 0.9]])
        _, w, rho = rectangle_rule(points, [-1.0, -1.0], [1.0, 1.0], nodes=24)
        area = np.sum(w * rho**2 / 2.0, axis=1)
        np.testing.assert_allclose(area, 4.0, rtol=1e-10)
        np.testing.assert_allclose(w.sum(axis=1), 2 * math.pi, rtol=1e-14)

    def test_rectangle_rule_1d(self):
        """In 1D the rays are +-1 with the two distances to the interval ends."""
        dirs, w, rho = rectangle_rule(np.array([[0.25]]), [-1.0], [1.0])
        np.testing.assert_array_equal(dirs[0, :, 0], [1.0, -1.0])
        np.testing.assert_array_equal(rho[0], [0.75, 1.25])
        np.testing.assert_array_equal(w[0], [1.0, 1.0])

    def test_radial_rule(self):
        """The composite radial rule integrates a decaying power to high accuracy."""
        t, w = radial_rule(0.01, 50.0, cap=1.0)
        exact = (0.5 ** -1.5 - 50.5 ** -1.5) / 1.5
        self.assertAlmostEqual(np.sum(w * (0.5 + t) ** -2.5), exact, places=12)
        self.assertAlmostEqual(w.sum(), 50.0, places=12)


class LocalModularTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid(1, 2.0, 1024)
        self.parabola = sample("parabola", self.grid)

    def test_zero(self):
        """The zero field has zero modulars."""
        u = GridField(self.grid, np.zeros(self.grid.shape), 1.0)
        self.assertEqual(modular_IG(QUADRATIC, u).value, 0.0)
        self.assertEqual(
            modular_IGA_local(QUADRATIC, u, MagneticPotential.constant([1.0])).value, 0.0
        )

    def test_parabola_IG(self):
        """G = t^2 on the parabola gives 16/15."""
        value = modular_IG(parse_family("powerp:2"), self.parabola).value
        self.assertAlmostEqual(value, 16 / 15, delta=1e-4)

    def test_re_im_swap(self):
        """u and i u have the same modular."""
        u = sample("phase:1.5:parabola", self.grid)
        iu = u.with_values(1j * u.values)
        F = parse_family("blend:2:4")
        self.assertAlmostEqual(modular_IG(F, u).value, modular_IG(F, iu).value, places=13)

    def test_magnetic_parabola(self):
        """G = t^2/2, A = 1 on the parabola gives 28/15."""
        A = MagneticPotential.constant([1.0])
        value = modular_IGA_local(QUADRATIC, self.parabola, A).value
        self.assertAlmostEqual(value, 28 / 15, delta=28 / 15 * 1e-3)

    def test_real_field_without_potential(self):
        """A = 0 and u real reduce to the integral of G(|u'|)."""
        F = parse_family("power:3")
        A = MagneticPotential.zero(1)
        expected = 4 / 3
        value = modular_IGA_local(F, self.parabola, A).value
        self.assertAlmostEqual(value, expected, delta=1e-3 * expected)

    def test_stencil_error(self):
        """A field touching the grid edge has no local modular."""
        grid = Grid(1, 1.0, 16)
        values = np.zeros(grid.shape)
        values[0] = 1.0
        u = GridField(grid, values, 1.0)
        with self.assertRaises(StencilError):
            modular_IGA_local(QUADRATIC, u, MagneticPotential.zero(1))

    def test_gauge_invariance(self):
        """(e^{icx} u, A + c) has the same local modular in 1D and 2D."""
        for grid, field in [(Grid(1, 2.0, 256), "bump:1"), (Grid(2, 2.0, 48), "bump:1")]:
            u = sample(field, grid)
            A = MagneticPotential.constant([0.3] * grid.n)
            base = modular_IGA_local(QUADRATIC, u, A).value
            tilde = modular_IGA_local(parse_family("blend:1.5:3"), u, A, tilde=True).value
            for c in (0.5, 1.0, 2.0):
                v, B = gauge_transform(u, A, c)
                self.assertAlmostEqual(
                    modular_IGA_local(QUADRATIC, v, B).value / base, 1.0, delta=1e-10
                )
                self.assertAlmostEqual(
                    modular_IGA_local(parse_family("blend:1.5:3"), v, B, tilde=True).value
                    / tilde,
                    1.0,
                    delta=1e-10,
                )

    def test_covariant_gradient(self):
        """Central differences of e^{ix} bump with A = 1 recover e^{ix} bump'."""
        grid = Grid(1, 2.0, 512)
        u = sample("phase:1:bump:1", grid)
        V = covariant_gradient(u, MagneticPotential.constant([1.0]))[..., 0]
        x = grid.axis
        slope = np.where(np.abs(x) < 1, -4 * x * (1 - x**2), 0.0)
        np.testing.assert_allclose(V, np.exp(1j * x) * slope, atol=1e-3)


class FractionalModularTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid(1, 8.0, 1024)
        self.gaussian = sample("gaussian:1", self.grid)
        self.cfg = QuadratureConfig()

    def test_zero(self):
        """The zero field has zero value."""
        u = GridField(self.grid, np.zeros(self.grid.shape), 1.0)
        report = modular_IsGA(QUADRATIC, u, MagneticPotential.constant([1.0]), 0.5, self.cfg)
        self.assertEqual(report.value, 0.0)

    def test_fourier_oracle(self):
        """G = t^2/2, gaussian(1), s = 1/2: the seminorm identity gives pi."""
        report = modular_IsG(QUADRATIC, self.gaussian, 0.5, self.cfg)
        self.assertAlmostEqual(report.value / math.pi, 1.0, delta=0.01)
        self.assertEqual(report.kind, "IsG")
        self.assertGreaterEqual(report.error_estimate, 0.0)

    def test_real_field_without_potential(self):
        """With A = 0 the magnetic form coincides with the plain one."""
        grid = Grid(1, 4.0, 256)
        u = sample("bump:1", grid)
        A = MagneticPotential.zero(1)
        F = parse_family("blend:2:4")
        plain = modular_IsG(F, u, 0.7, self.cfg).value
        magnetic = modular_IsGA(F, u, A, 0.7, self.cfg).value
        self.assertEqual(plain, magnetic)
        self.assertGreater(plain, 0.0)

    def test_order_validation(self):
        """s must lie in (0, 1)."""
        for s in (0.0, 1.0, -0.2):
            with self.assertRaises(DomainError):
                modular_IsG(QUADRATIC, self.gaussian, s, self.cfg)

    def test_gauge_invariance(self):
        """Constant gauge shifts leave the quadratic and the modulus forms unchanged."""
        grid = Grid(1, 4.0, 256)
        u = sample("bump:1", grid)
        A = MagneticPotential.constant([0.5])
        F = parse_family("blend:1.5:3")
        base = modular_IsGA(QUADRATIC, u, A, 0.6, self.cfg).value
        base_tilde = modular_IsGA(F, u, A, 0.6, self.cfg, tilde=True).value
        for c in (0.5, 1.0, 2.0):
            v, B = gauge_transform(u, A, c)
            shifted = modular_IsGA(QUADRATIC, v, B, 0.6, self.cfg).value
            self.assertAlmostEqual(shifted / base, 1.0, delta=1e-8)
            shifted = modular_IsGA(F, v, B, 0.6, self.cfg, tilde=True).value
            self.assertAlmostEqual(shifted / base_tilde, 1.0, delta=1e-8)

    def test_gauge_invariance_2d(self):
        """The 2D discretization commutes with constant gauge shifts as well."""
        grid = Grid(2, 2.0, 32)
        u = sample("bump:1", grid)
        A = MagneticPotential.constant([0.5, -0.25])
        base = modular_IsGA(QUADRATIC, u, A, 0.7, self.cfg).value
        v, B = gauge_transform(u, A, [1.0, 0.5])
        shifted = modular_IsGA(QUADRATIC, v, B, 0.7, self.cfg).value
        self.assertAlmostEqual(shifted / base, 1.0, delta=1e-8)

    def test_gauge_shift_from_zero_potential(self):
        """Shifting A = 0 to a constant keeps the quadratic value; the exterior stays mirrored."""
        grid = Grid(1, 8.0, 256)
        u = sample("gaussian:1", grid)
        zero = MagneticPotential.zero(1)
        base = modular_IsGA(QUADRATIC, u, zero, 0.7, self.cfg)
        for c in (0.5, 1.0, 2.0):
            v, B = gauge_transform(u, zero, c)
            shifted = modular_IsGA(QUADRATIC, v, B, 0.7, self.cfg)
            self.assertAlmostEqual(shifted.value / base.value, 1.0, delta=1e-8, msg=c)
            self.assertEqual(shifted.parts["exterior_out"], shifted.parts["exterior_in"])

    def test_gauge_shift_modulus_form(self):
        """blend:2:4: the modulus form is gauge invariant, the split form is not."""
        grid = Grid(1, 4.0, 256)
        u = sample("bump:1", grid)
        F = parse_family("blend:2:4")
        self.assertFalse(F.quadratic)
        for A in (MagneticPotential.zero(1), MagneticPotential.constant([0.5])):
            base = modular_IsGA(F, u, A, 0.7, self.cfg, tilde=True).value
            split = modular_IsGA(F, u, A, 0.7, self.cfg).value
            v, B = gauge_transform(u, A, 1.0)
            shifted = modular_IsGA(F, v, B, 0.7, self.cfg, tilde=True).value
            self.assertAlmostEqual(shifted / base, 1.0, delta=1e-8)
            shifted_split = modular_IsGA(F, v, B, 0.7, self.cfg).value
            self.assertGreater(abs(shifted_split / split - 1.0), 1e-4)

    def test_split_modulus_equivalence(self):
        """G(|Re z|) + G(|Im z|) <= 2 G(|z|) and G(|z|) <= C (G(|Re z|) + G(|Im z|))."""
        rng = np.random.default_rng(7)
        z = (rng.normal(size=10_000) + 1j * rng.normal(size=10_000)) * 10.0 ** rng.uniform(
            -3, 3, 10_000
        )
        for spec in ["power:2", "power:1.5", "blend:2:4"]:
            F = parse_family(spec)
            split = SPLIT.energy(z, F.G)
            modulus = TILDE.energy(z, F.G)
            self.assertTrue(np.all(split <= 2 * modulus * (1 + 1e-12)), spec)
            self.assertTrue(np.all(modulus <= F.delta2_C * split * (1 + 1e-12)), spec)

        grid = Grid(1, 4.0, 256)
        u = random_field(grid, rng)
        A = MagneticPotential.constant([1.0])
        F = parse_family("blend:2:4")
        split = modular_IsGA(F, u, A, 0.6, self.cfg).value
        modulus = modular_IsGA(F, u, A, 0.6, self.cfg, tilde=True).value
        self.assertLessEqual(split, 2 * modulus * (1 + 1e-9))
        self.assertLessEqual(modulus, F.delta2_C * split * (1 + 1e-9))

    def test_convexity(self):
        """The modular is midpoint convex in u."""
        rng = np.random.default_rng(11)
        grid = Grid(1, 4.0, 128)
        A = MagneticPotential.shear([[0.5]], grid, offset=[0.2])
        F = parse_family("blend:1.5:3")
        for _ in range(3):
            u, v = random_field(grid, rng), random_field(grid, rng)
            mid = u.with_values(0.5 * (u.values + v.values))
            left = modular_IsGA(F, mid, A, 0.6, self.cfg).value
            right = 0.5 * (
                modular_IsGA(F, u, A, 0.6, self.cfg).value
                + modular_IsGA(F, v, A, 0.6, self.cfg).value
            )
            self.assertLessEqual(left, right + 1e-10 * max(1.0, right))

    def test_shell_policy(self):
        """Omitting the near field lowers the value and reports it as error."""
        taylor = modular_IsG(QUADRATIC, self.gaussian, 0.8, self.cfg)
        omit_cfg = self.cfg.with_options(shell_policy="omit")
        omit = modular_IsG(QUADRATIC, self.gaussian, 0.8, omit_cfg)
        self.assertLess(omit.value, taylor.value)
        self.assertAlmostEqual(omit.error_estimate, taylor.parts["near"], places=12)

    def test_worker_count_does_not_change_result(self):
        """Blocked reduction is bitwise reproducible across thread counts."""
        grid = Grid(1, 4.0, 256)
        u = random_field(grid, np.random.default_rng(3))
        A = MagneticPotential.constant([1.0])
        F = parse_family("blend:2:4")
        one = modular_IsGA(F, u, A, 0.7, self.cfg.with_options(workers=1)).value
        eight = modular_IsGA(F, u, A, 0.7, self.cfg.with_options(workers=8)).value
        self.assertEqual(one, eight)

    def test_scaled_ladder_is_finite(self):
        """(1 - s) I_{s,G}^A stays finite and positive over the default ladder."""
        grid = Grid(1, 4.0, 256)
        u = sample("phase:1:bump:1", grid)
        A = MagneticPotential.constant([1.0])
        for s in (0.6, 0.7, 0.8, 0.875, 0.925, 0.95):
            value = (1 - s) * modular_IsGA(QUADRATIC, u, A, s, self.cfg).value
            self.assertTrue(math.isfinite(value) and value > 0, s)

    def test_gradient_matches_finite_differences(self):
        """The assembled gradient agrees with central differences of the value."""
        rng = np.random.default_rng(5)
        grid = Grid(1, 2.0, 64)
        u = random_field(grid, rng, radius=1.0)
        A = MagneticPotential.constant([0.8])
        for spec, tilde in [("power:2", False), ("blend:2:4", False), ("power:1.5", True)]:
            F = parse_family(spec)
            box = active_box(u, self.cfg)
            quadrature = FractionalQuadrature(grid, A, 0.7, box, self.cfg, tilde)
            U = quadrature.restrict(u.values)
            _, grad, _, _ = quadrature.evaluate(F, U, want_grad=True)
            for _ in range(3):
                direction = rng.normal(size=U.size) + 1j * rng.normal(size=U.size)
                step = 1e-5
                plus = quadrature.evaluate(F, U + step * direction)[0]
                minus = quadrature.evaluate(F, U - step * direction)[0]
                numeric = (plus - minus) / (2 * step)
                analytic = float(np.sum(grad.real * direction.real + grad.imag * direction.imag))
                self.assertAlmostEqual(numeric / analytic, 1.0, delta=1e-5, msg=spec)

    def test_config_validation(self):
        """Bad policies, radii and counts are rejected."""
        with self.assertRaises(InputError):
            QuadratureConfig(shell_policy="drop")
        with self.assertRaises(InputError):
            QuadratureConfig(reduction_block=0)
        with self.assertRaises(InputError):
            QuadratureConfig(truncation_radius=1.0).radius_for(self.grid)
        self.assertEqual(QuadratureConfig().radius_for(self.grid), 16 * self.grid.L)


class LuxemburgTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid(1, 2.0, 256)
        self.F = parse_family("powerp:2")

    def test_zero(self):
        """The zero field has norm 0."""
        u = GridField(self.grid, np.zeros(self.grid.shape), 1.0)
        self.assertEqual(luxemburg_norm(self.F, u), 0.0)

    def test_quadratic_closed_form(self):
        """G = t^2 and discrete integral of u^2 equal to 4 give norm 2."""
        u = sample("parabola", self.grid)
        mass = modular_IG(self.F, u).value
        u = u.scaled(2.0 / math.sqrt(mass))
        self.assertAlmostEqual(luxemburg_norm(self.F, u), 2.0, delta=2e-10)

    def test_homogeneity(self):
        """||3 u|| = 3 ||u|| for local and fractional kinds."""
        u = sample("phase:1:bump:1", self.grid)
        F = parse_family("blend:2:4")
        A = MagneticPotential.constant([1.0])
        for kind, s in [("IG", None), ("IGA", None), ("IsGA", 0.6), ("tilde_IsGA", 0.6)]:
            base = luxemburg_norm(F, u, kind, s=s, A=A)
            tripled = luxemburg_norm(F, u.scaled(3.0), kind, s=s, A=A)
            self.assertAlmostEqual(tripled / base, 3.0, delta=1e-8, msg=kind)

    def test_dispatch(self):
        """Unknown kinds and fractional kinds without s are input errors."""
        u = sample("bump:1", self.grid)
        with self.assertRaises(InputError):
            evaluate_modular("IH", self.F, u)
        with self.assertRaises(InputError):
            evaluate_modular("IsG", self.F, u)
        report = evaluate_modular("tilde_IG", self.F, u)
        self.assertEqual(report.kind, "tilde_IG")
