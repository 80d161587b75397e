import io
import os
import tempfile
import unittest

import numpy as np
import pandas as pd
import pytest

from killingfoliator.kf_core import DimensionMismatchError
from killingfoliator.kf_expr import parse_expr
from killingfoliator.kf_flow import trajectory
from killingfoliator.kf_helpers import X1, X2, X3, X4, X5, X6, TORUS_X, TORUS_Y, FAMILIES, SPHERE_INVARIANT, \
    TORUS_INVARIANT
from killingfoliator.kf_lie import FieldFamily
from killingfoliator.kf_orbit import orbit_dimension, dimension_stratification, sample_orbit, conserved_check, \
    PointCloud

SO3 = FieldFamily([X4, X5, X6])
TORUS = FieldFamily([TORUS_X, TORUS_Y], ['X', 'Y'])


class TestOrbitDimension(unittest.TestCase):
    def test_rotations(self):
        self.assertEqual(orbit_dimension(SO3, (0, 0, 0)), 0)
        self.assertEqual(orbit_dimension(SO3, (1, 2, 3)), 2)
        # brackets count: X4 and X5 alone still sweep out spheres
        self.assertEqual(orbit_dimension(FieldFamily([X4, X5]), (0, 0, 1)), 2)
        self.assertEqual(orbit_dimension(FieldFamily([X6]), (0, 0, 5)), 0)
        self.assertEqual(orbit_dimension(FieldFamily([X6]), (1, 0, 5)), 1)

    def test_translations(self):
        self.assertEqual(orbit_dimension(FieldFamily([X1, X2, X3]), (4, -1, 0.5)), 3)
        self.assertEqual(orbit_dimension(FieldFamily([X6, X1]), (0, 0, 0)), 2)

    def test_torus(self):
        self.assertEqual(orbit_dimension(TORUS, (0.6, 0.0, 0.8, 0.0)), 2)
        s = 1 / np.sqrt(2)
        self.assertEqual(orbit_dimension(TORUS, (s, 0.0, 0.0, s)), 1)
        self.assertEqual(orbit_dimension(TORUS, (0, 0, 0, 0)), 0)


class TestStratification(unittest.TestCase):
    def test_rotations(self):
        summary = dimension_stratification(SO3, (-1, 1), 5)
        self.assertEqual(summary.counts, {0: 1, 1: 0, 2: 124, 3: 0})
        self.assertEqual(summary.representatives[0], (0.0, 0.0, 0.0))
        self.assertEqual(summary.total, 125)
        self.assertEqual(summary.dimensions_present(), {0, 2})

    def test_translations(self):
        summary = dimension_stratification(FieldFamily([X1, X2, X3]), (-1, 1), 3)
        self.assertEqual(summary.counts, {0: 0, 1: 0, 2: 0, 3: 27})

    def test_axis(self):
        summary = dimension_stratification(FieldFamily([X6]), (-1, 1), 3)
        self.assertEqual(summary.counts[0], 3)
        self.assertEqual(summary.counts[1], 24)

    def test_vector_box(self):
        # the box misses the axis of X6
        summary = dimension_stratification(FieldFamily([X6]), ([0.5, 0.5, -1], [1.5, 1.5, 1]), 4)
        self.assertEqual(summary.counts[1], 64)
        np.testing.assert_array_equal(summary.lower, [0.5, 0.5, -1])

    def test_frame(self):
        frame = dimension_stratification(SO3, (-1, 1), 3).to_frame()
        self.assertEqual(list(frame.columns), ['dimension', 'nodes', 'representative'])
        self.assertEqual(list(frame['dimension']), [0, 1, 2, 3])
        self.assertEqual(frame['representative'][0], '0.0,0.0,0.0')
        self.assertEqual(frame['representative'][1], '')

    def test_invalid(self):
        with self.assertRaises(ValueError):
            dimension_stratification(SO3, (-1, 1), 1)
        with self.assertRaises(ValueError):
            dimension_stratification(SO3, (1, -1), 3)


class TestSampleOrbit(unittest.TestCase):
    def test_torus_invariants(self):
        p0 = (0.6, 0.0, 0.8, 0.0)
        cloud = sample_orbit(TORUS, p0, 500, seed=0, invariants=[SPHERE_INVARIANT, TORUS_INVARIANT])
        self.assertEqual(len(cloud), 501)
        self.assertEqual(cloud.dim, 4)
        np.testing.assert_array_equal(cloud.points[0], p0)
        for text, values in cloud.invariant_values:
            self.assertLessEqual(np.max(np.abs(values - values[0])), 1e-9, text)
        self.assertEqual(cloud.invariant_values[1][1][0], 0.0)
        # the orbit is 2-dimensional, so the walk leaves the start circle of either field
        self.assertGreater(np.ptp(cloud.points[:, 1]), 0.1)
        self.assertGreater(np.ptp(cloud.points[:, 3]), 0.1)

    def test_deterministic(self):
        a = sample_orbit(SO3, (1, 0, 0), 50, seed=7)
        b = sample_orbit(SO3, (1, 0, 0), 50, seed=7)
        c = sample_orbit(SO3, (1, 0, 0), 50, seed=8)
        np.testing.assert_array_equal(a.points, b.points)
        self.assertFalse(np.array_equal(a.points, c.points))
        self.assertEqual(a.provenance['seed'], 7)
        self.assertEqual(a.provenance['family'], ['X1', 'X2', 'X3'])

    def test_invalid(self):
        with self.assertRaises(ValueError):
            sample_orbit(SO3, (1, 0, 0), 0)
        with self.assertRaises(DimensionMismatchError):
            sample_orbit(SO3, (1, 0, 0, 0), 10)
        with self.assertRaises(DimensionMismatchError):
            PointCloud([1.0, 2.0, 3.0])

    def test_csv(self):
        cloud = sample_orbit(SO3, (0, 0, 1), 4, invariants=['x^2 + y^2 + z^2'])
        frame = pd.read_csv(io.StringIO(cloud.to_csv()))
        self.assertEqual(list(frame.columns), ['x1', 'x2', 'x3', 'x^2 + y^2 + z^2'])
        self.assertEqual(len(frame), 5)
        np.testing.assert_allclose(frame['x^2 + y^2 + z^2'], 1.0, rtol=0, atol=1e-12)

    def test_ply(self):
        cloud = sample_orbit(TORUS, (0.6, 0.0, 0.8, 0.0), 10, invariants=[SPHERE_INVARIANT, TORUS_INVARIANT])
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'cloud.ply')
            cloud.to_ply(path)
            with open(path) as f:
                lines = f.read().splitlines()
        header = lines[:lines.index('end_header') + 1]
        self.assertEqual(header[:2], ['ply', 'format ascii 1.0'])
        self.assertIn('comment inv1 = x^2 + y^2 + z^2 + w^2', header)
        self.assertIn('comment inv2 = y*z - x*w', header)
        self.assertIn('element vertex 11', header)
        self.assertEqual([l for l in header if l.startswith('property')],
                         ['property float {}'.format(n) for n in ('x', 'y', 'z', 'w', 'inv1', 'inv2')])
        body = lines[len(header):]
        self.assertEqual(len(body), 11)
        self.assertTrue(all(len(l.split()) == 6 for l in body))
        self.assertEqual([float(v) for v in body[0].split()[:4]], [0.6, 0.0, 0.8, 0.0])


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_sphere_orbits(radius):
    cloud = sample_orbit(FieldFamily(*FAMILIES['spheres']), (radius, 0, 0), 200, seed=3,
                         invariants=['x^2 + y^2 + z^2'])
    values = cloud.invariant_values[0][1]
    np.testing.assert_allclose(values, radius ** 2, rtol=0, atol=1e-12 * max(1.0, radius ** 2))


class TestConservedCheck(unittest.TestCase):
    p0 = (0.6, 0.0, 0.8, 0.0)

    def test_torus_invariants(self):
        for f in (TORUS_X, TORUS_Y):
            traj = trajectory(f, self.p0, 0.0, 2 * np.pi, 200)
            for inv in (SPHERE_INVARIANT, TORUS_INVARIANT):
                report = conserved_check(f, inv, traj)
                self.assertTrue(report.passed, (inv, report.max_drift))
                self.assertTrue(report.lie_derivative_vanishes)
                self.assertIsNone(report.witness)
                self.assertEqual(report.verdict, 'pass')

    def test_not_conserved(self):
        traj = trajectory(TORUS_Y, self.p0, 0.0, 2 * np.pi, 200)
        report = conserved_check(TORUS_Y, 'x^2 + y^2', traj)
        self.assertFalse(report.passed)
        self.assertFalse(report.lie_derivative_vanishes)
        self.assertIsNotNone(report.witness)
        # L_Y (x^2 + y^2) = 2xz + 2yw
        points = np.random.default_rng(0).uniform(-1, 1, (10, 4))
        expected = 2 * points[:, 0] * points[:, 2] + 2 * points[:, 1] * points[:, 3]
        np.testing.assert_allclose(report.lie_derivative.evaluate_many(points), expected, rtol=0, atol=1e-14)

    def test_expression_field(self):
        f = TORUS_Y.to_expr_field()
        traj = trajectory(f, self.p0, 0.0, 1.0, 5)
        report = conserved_check(f, parse_expr(TORUS_INVARIANT, 4), traj)
        self.assertTrue(report.passed)

    def test_dimension(self):
        traj = trajectory(TORUS_Y, self.p0, 0.0, 1.0, 5)
        with self.assertRaises(DimensionMismatchError):
            conserved_check(TORUS_Y, parse_expr('x', 3), traj)


ORBIT_STARTS = [(name, FieldFamily(*FAMILIES[name]), (1.0, 2.0, 3.0)) for name in sorted(FAMILIES)] + \
               [('torus', TORUS, (0.6, 0.0, 0.8, 0.0))]


@pytest.mark.parametrize("name,D,p0", ORBIT_STARTS, ids=[s[0] for s in ORBIT_STARTS])
def test_orbit_dimension_constant_on_cloud(name, D, p0):
    cloud = sample_orbit(D, p0, 200, seed=3)
    dims = {orbit_dimension(D, p) for p in cloud.points}
    assert dims == {orbit_dimension(D, p0)}
