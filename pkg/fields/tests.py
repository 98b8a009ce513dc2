import tempfile

import numpy as np
from django.test import SimpleTestCase

from orliczlab.exceptions import DomainError, InputError, ResolutionError

from .grid import Domain, Grid, GridField, parse_domain
from .io import export_field, import_field
from .operators import (
    bump_kernel,
    cutoff_profile,
    gauge_transform,
    modulus_field,
    mollify,
    truncate,
)
from .potentials import MagneticPotential, parse_potential
from .samples import sample


class GridTests(SimpleTestCase):
    def test_spacing_and_nodes(self):
        """h = 2L/N, the origin and +-1 are nodes on the default solve grid."""
        grid = Grid(1, 2.0, 1024)
        self.assertEqual(grid.h, 1.0 / 256)
        self.assertEqual(grid.index_of(0.0), (512,))
        self.assertEqual(grid.index_of(-1.0), (256,))
        self.assertEqual(grid.size, 1024)

    def test_invalid_grids_rejected(self):
        """Odd or tiny N and n = 3 are input errors."""
        for args in [(1, 1.0, 7), (1, 1.0, 6), (3, 1.0, 8), (1, 0.0, 8)]:
            with self.assertRaises(InputError):
                Grid(*args)

    def test_point_off_grid(self):
        """Points outside the grid or between nodes are rejected."""
        grid = Grid(1, 2.0, 16)
        with self.assertRaises(InputError):
            grid.index_of(5.0)
        with self.assertRaises(InputError):
            grid.index_of(0.1)

    def test_field_must_vanish_outside_support(self):
        """Zero extension is enforced at construction."""
        grid = Grid(1, 2.0, 16)
        with self.assertRaises(InputError):
            GridField(grid, np.ones(grid.shape), 1.0)

    def test_field_values_are_copied_and_frozen(self):
        """Fields do not alias the caller's array."""
        grid = Grid(1, 2.0, 16)
        raw = np.zeros(grid.shape)
        u = GridField(grid, raw, 1.0)
        raw[8] = 5.0
        self.assertTrue(u.is_zero())
        with self.assertRaises(ValueError):
            u.values[8] = 1.0

    def test_domain(self):
        """Box diameter is exact and the domain must sit strictly inside the grid."""
        omega = parse_domain("-1:1", 2)
        self.assertAlmostEqual(omega.diameter, 2.0 * np.sqrt(2.0))
        grid = Grid(2, 2.0, 32)
        mask = omega.interior_mask(grid)
        self.assertEqual(int(mask.sum()), 15 * 15)
        with self.assertRaises(DomainError):
            Domain((-2.0,), (1.0,)).check_inside(Grid(1, 2.0, 32))
        with self.assertRaises(DomainError):
            Domain((1.0,), (1.0,))


class SampleTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid(1, 8.0, 256)

    def test_gaussian_at_origin(self):
        """gaussian(1) at 0 is 1."""
        u = sample("gaussian:1", self.grid)
        self.assertEqual(u.at(0.0), 1 + 0j)

    def test_bump_compact_support(self):
        """The bump vanishes for |x| >= R."""
        u = sample("bump:1", self.grid)
        self.assertEqual(u.at(1.0), 0)
        self.assertEqual(u.at(-2.0), 0)
        self.assertEqual(u.at(0.0), 1)

    def test_parabola_value(self):
        """parabola(0.5) = 0.75."""
        u = sample("parabola", self.grid)
        self.assertAlmostEqual(u.at(0.5).real, 0.75, places=14)

    def test_phase_field(self):
        """phase:2:<base> has Re = cos(2x) * base."""
        base = sample("bump:1", self.grid)
        u = sample("phase:2:bump:1", self.grid)
        x = self.grid.axis
        np.testing.assert_allclose(u.real, np.cos(2 * x) * base.real, atol=1e-15)
        np.testing.assert_allclose(np.abs(u.values), np.abs(base.values), atol=1e-15)

    def test_unknown_or_oversized(self):
        """Unknown names and supports that leave the grid are input errors."""
        with self.assertRaises(InputError):
            sample("sawtooth", self.grid)
        with self.assertRaises(InputError):
            sample("gaussian:2", self.grid)


class PotentialTests(SimpleTestCase):
    def test_parse_kinds(self):
        """zero, const, shear and wave potentials parse and verify their bounds."""
        grid = Grid(2, 2.0, 32)
        for spec, kind in [
            ("zero", "constant"),
            ("const:1,2", "constant"),
            ("shear:0,1,-1,0", "shear"),
            ("wave:0.5,3", "sampled"),
        ]:
            A = parse_potential(spec, grid)
            self.assertEqual(A.kind, kind)
            self.assertTrue(A.verify(grid), spec)

    def test_link_phase_constant(self):
        """theta = (x - y) . c for a constant potential."""
        A = MagneticPotential.constant([1.5])
        self.assertAlmostEqual(float(A.link_phase([1.0], [-1.0])), 3.0)

    def test_bad_potential(self):
        """Unknown kinds and wrong component counts are rejected."""
        grid = Grid(2, 2.0, 32)
        with self.assertRaises(InputError):
            parse_potential("vortex", grid)
        with self.assertRaises(InputError):
            parse_potential("const:1,2,3", grid)


class OperatorTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid(1, 8.0, 512)

    def test_mollify_zero_and_resolution(self):
        """Zero stays zero; eps below 2h is a resolution error."""
        zero = GridField(self.grid, np.zeros(self.grid.shape), 1.0)
        self.assertTrue(mollify(zero, 0.5).is_zero())
        with self.assertRaises(ResolutionError):
            mollify(zero, self.grid.h)

    def test_kernel_unit_mass(self):
        """The renormalized kernel has unit discrete mass, so constants are kept inside."""
        kernel = bump_kernel(self.grid, 0.25)
        self.assertAlmostEqual(kernel.sum() * self.grid.h, 1.0, places=13)
        u = sample("const:1", Grid(1, 4.0, 256))
        v = mollify(truncate(u, 1.0), 0.25)
        self.assertAlmostEqual(v.at(0.0).real, 1.0, places=12)

    def test_mollify_mass_and_sup(self):
        """Mass is conserved and the sup-norm contracts."""
        u = sample("gaussian:1", self.grid)
        v = mollify(u, 0.1)
        mass_u = u.values.sum() * self.grid.h
        mass_v = v.values.sum() * self.grid.h
        self.assertLess(abs(mass_v - mass_u) / abs(mass_u), 1e-10)
        self.assertLessEqual(v.sup_norm(), u.sup_norm() + 1e-15)
        self.assertAlmostEqual(v.support_radius, u.support_radius + 0.1)

    def test_cutoff_profile(self):
        """q = 1 on [0, 1], 0 from 2 on, C1 ramp with slope at most 1.5."""
        r = np.linspace(0.0, 3.0, 3001)
        q = cutoff_profile(r)
        self.assertTrue(np.all(q[r <= 1.0] == 1.0))
        self.assertTrue(np.all(q[r >= 2.0] == 0.0))
        self.assertLessEqual(np.max(np.abs(np.diff(q))) / (r[1] - r[0]), 1.5 + 1e-6)

    def test_truncate(self):
        """Truncation is the identity for large k and shrinks |u| otherwise."""
        u = sample("gaussian:1", self.grid)
        np.testing.assert_array_equal(truncate(u, 10.0).values, u.values)
        v = truncate(u, 1.0)
        self.assertTrue(np.all(np.abs(v.values) <= np.abs(u.values)))
        self.assertEqual(v.at(2.0), 0)
        self.assertEqual(v.support_radius, 2.0)

    def test_gauge_transform(self):
        """e^{icx} keeps |u| and shifts A by c; c = 0 is the identity."""
        u = sample("bump:1", self.grid)
        A = MagneticPotential.constant([1.0])
        same, A0 = gauge_transform(u, A, 0.0)
        self.assertIs(same, u)
        self.assertIs(A0, A)
        v, A2 = gauge_transform(u, A, 2.0)
        np.testing.assert_allclose(np.abs(v.values), np.abs(u.values), atol=1e-15)
        np.testing.assert_allclose(v.real, np.cos(2 * self.grid.axis) * u.real, atol=1e-15)
        self.assertEqual(float(A2.offset[0]), 3.0)

    def test_modulus_field(self):
        """|3 + 4i| = 5 and |i v| = |v|."""
        grid = Grid(1, 2.0, 16)
        values = np.zeros(grid.shape, dtype=complex)
        values[8] = 3 + 4j
        values[9] = -2j
        m = modulus_field(GridField(grid, values, 1.0))
        self.assertEqual(m.at(0.0), 5)
        self.assertEqual(m.values[9], 2)
        self.assertTrue(m.is_real())


class FieldIOTests(SimpleTestCase):
    def test_export_import(self):
        """Exported fields read back with identical values and metadata."""
        grid = Grid(2, 2.0, 16)
        u = sample("phase:1,0.5:bump:1", grid)
        with tempfile.TemporaryDirectory() as tmp:
            paths = export_field(u, f"{tmp}/u")
            self.assertEqual([p.suffix for p in paths], [".csv", ".json"])
            v = import_field(f"{tmp}/u")
        np.testing.assert_array_equal(v.values, u.values)
        self.assertEqual(v.grid, grid)
        self.assertEqual(v.support_radius, u.support_radius)

    def test_missing_files(self):
        """Missing manifests raise InputError."""
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(InputError):
                import_field(f"{tmp}/absent")
