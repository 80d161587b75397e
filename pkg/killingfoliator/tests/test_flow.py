import math
import os
import tempfile
import unittest

import numpy as np
import pytest
from scipy.linalg import expm as scipy_expm

from killingfoliator.kf_core import DimensionMismatchError
from killingfoliator.kf_fields import make_affine, make_expr_field
from killingfoliator.kf_flow import expm, augmented_generator, flow_affine, flow_numeric, trajectory, \
    isometry_spotcheck
from killingfoliator.kf_helpers import X1, X2, X3, X6, HOPF, TORUS_X, TORUS_Y, screw_field, screw_curve, hopf_curve


def screw_closed_form(p0, l1, l2, t):
    """Flow of l1 * X6 + l2 * X3: clockwise rotation by l1 * t about the z axis, then a lift by l2 * t"""
    x, y, z = p0
    c, s = math.cos(l1 * t), math.sin(l1 * t)
    return np.array([x * c + y * s, y * c - x * s, z + l2 * t])


class TestExpm(unittest.TestCase):
    def test_zero(self):
        np.testing.assert_array_equal(expm(np.zeros((4, 4))), np.eye(4))

    def test_against_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            M = rng.standard_normal((4, 4))
            np.testing.assert_allclose(expm(M), scipy_expm(M), rtol=1e-10, atol=1e-10)

    def test_skew_is_rotation(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            K = rng.uniform(-4, 4, (3, 3))
            R = expm(K - K.T)
            np.testing.assert_allclose(R.T @ R, np.eye(3), rtol=0, atol=1e-12)
            self.assertAlmostEqual(np.linalg.det(R), 1.0, places=12)

    def test_augmented_generator(self):
        M = augmented_generator(X6 + 2.0 * X3)
        self.assertEqual(M.shape, (4, 4))
        np.testing.assert_array_equal(M[:3, 3], [0, 0, 2])
        np.testing.assert_array_equal(M[3], [0, 0, 0, 0])


class TestFlowAffine(unittest.TestCase):
    def test_translation(self):
        p0 = np.array([0.3, -0.4, 1.2])
        f = X1 + 2.0 * X2
        np.testing.assert_allclose(flow_affine(f, p0, 0.5), p0 + 0.5 * np.array([1.0, 2.0, 0.0]), rtol=0,
                                   atol=1e-15)

    def test_screw_closed_form(self):
        p0 = (0.3, -0.4, 1.2)
        f = screw_field(2.0, 3.0)
        for t in (0.1, 1.0, math.pi):
            np.testing.assert_allclose(flow_affine(f, p0, t), screw_closed_form(p0, 2.0, 3.0, t), rtol=0,
                                       atol=1e-12)

    def test_hopf_period(self):
        p0 = np.array([0.5, 0.5, 0.5, 0.5])
        np.testing.assert_allclose(flow_affine(HOPF, p0, 2 * math.pi), p0, rtol=0, atol=1e-10)
        np.testing.assert_allclose(flow_affine(HOPF, p0, 1.3), hopf_curve(p0, 1.3), rtol=0, atol=1e-12)

    def test_group_law(self):
        rng = np.random.default_rng(2)
        f = screw_field(1.5, -0.5) + 0.3 * X1
        for _ in range(20):
            p = rng.uniform(-2, 2, 3)
            s, t = rng.uniform(-3, 3, 2)
            np.testing.assert_allclose(flow_affine(f, flow_affine(f, p, s), t), flow_affine(f, p, s + t),
                                       rtol=0, atol=1e-12)
        np.testing.assert_allclose(flow_affine(f, p, 0.0), p, rtol=0, atol=0)

    def test_commuting_flows(self):
        p = np.array([0.7, -1.1, 0.2])
        np.testing.assert_allclose(flow_affine(X6, flow_affine(X3, p, 0.8), 2.1),
                                   flow_affine(X3, flow_affine(X6, p, 2.1), 0.8), rtol=0, atol=1e-12)

    def test_dimension(self):
        with self.assertRaises(DimensionMismatchError):
            flow_affine(X6, (1, 0), 1.0)


class TestFlowNumeric(unittest.TestCase):
    def test_zero_field(self):
        f = make_expr_field(['0', '0', '0'])
        np.testing.assert_array_equal(flow_numeric(f, (1, 2, 3), 0.5), [1, 2, 3])
        np.testing.assert_array_equal(flow_numeric(X6, (1, 2, 3), 0.0), [1, 2, 3])

    def test_screw(self):
        f = make_expr_field(['2*y', '-2*x', '3'])
        p0 = (1.0, 0.0, 0.0)
        np.testing.assert_allclose(flow_numeric(f, p0, 1.0), screw_closed_form(p0, 2.0, 3.0, 1.0), rtol=0,
                                   atol=1e-10)
        np.testing.assert_allclose(flow_numeric(f, p0, -1.0), screw_closed_form(p0, 2.0, 3.0, -1.0), rtol=0,
                                   atol=1e-10)

    def test_fourth_order(self):
        f = make_expr_field(['2*y', '-2*x', '3'])
        p0 = (1.0, 0.0, 0.0)
        exact = screw_closed_form(p0, 2.0, 3.0, 1.0)
        coarse = np.linalg.norm(flow_numeric(f, p0, 1.0, step=0.125) - exact)
        fine = np.linalg.norm(flow_numeric(f, p0, 1.0, step=0.0625) - exact)
        self.assertTrue(12 <= coarse / fine <= 20, coarse / fine)

    def test_bad_step(self):
        with self.assertRaises(ValueError):
            flow_numeric(X6, (1, 0, 0), 1.0, step=0.0)


class TestTrajectory(unittest.TestCase):
    def test_quarter_turn(self):
        traj = trajectory(X6, (1, 0, 0), 0.0, math.pi / 2, 3)
        self.assertEqual(traj.integrator, 'exact')
        self.assertEqual(len(traj), 3)
        np.testing.assert_array_equal(traj.points[0], [1, 0, 0])
        s = math.sqrt(0.5)
        np.testing.assert_allclose(traj.points, [[1, 0, 0], [s, -s, 0], [0, -1, 0]], rtol=0, atol=1e-14)

    def test_shifted_start_time(self):
        traj = trajectory(X3, (0, 0, 0), 1.0, 3.0, 5)
        np.testing.assert_allclose(traj.points[:, 2], [0.0, 0.5, 1.0, 1.5, 2.0], rtol=0, atol=1e-15)
        np.testing.assert_array_equal(traj.times, [1.0, 1.5, 2.0, 2.5, 3.0])

    def test_numeric(self):
        # rotation at angular speed x^2 + y^2, which is 1 on the unit circle
        f = make_expr_field(['y*(x^2 + y^2)', '-x*(x^2 + y^2)', '0'])
        traj = trajectory(f, (1, 0, 0), 0.0, 1.0, 11)
        self.assertEqual(traj.integrator, 'rk4(step=0.001)')
        expected = [[math.cos(t), -math.sin(t), 0.0] for t in traj.times]
        np.testing.assert_allclose(traj.points, expected, rtol=0, atol=1e-10)

    def test_affine_expression_field_is_exact(self):
        f = make_expr_field(['y', '-x', '2'])
        traj = trajectory(f, (1, 0, 0), 0.0, 50.0, 3)
        self.assertEqual(traj.integrator, 'exact')
        self.assertIs(traj.field, f)
        exact = trajectory(X6 + 2.0 * X3, (1, 0, 0), 0.0, 50.0, 3)
        np.testing.assert_allclose(traj.points, exact.points, rtol=0, atol=1e-12)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            trajectory(X6, (1, 0, 0), 0.0, 1.0, 1)
        with self.assertRaises(ValueError):
            trajectory(X6, (1, 0, 0), 1.0, 0.0, 5)
        with self.assertRaises(DimensionMismatchError):
            trajectory(X6, (1, 0, 0, 0), 0.0, 1.0, 5)

    def test_csv(self):
        text = trajectory(X3, (0, 0, 0), 0.0, 1.0, 3).to_csv()
        lines = text.strip().splitlines()
        self.assertEqual(lines[0], 't,x1,x2,x3')
        self.assertEqual(len(lines), 4)
        self.assertEqual(lines[-1], '1.0,0.0,0.0,1.0')

    def test_csv_file(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'traj.csv')
            trajectory(HOPF, (1, 0, 0, 0), 0.0, 1.0, 4).to_csv(path)
            with open(path) as f:
                self.assertEqual(f.readline().strip(), 't,x1,x2,x3,x4')


class TestIsometry(unittest.TestCase):
    pairs = [((1, 0, 0), (0, 1, 0)), ((0.3, -2, 1), (1, 1, 1))]

    def test_killing_fields(self):
        for f in (X6, screw_field(2.0, 3.0), X1 + X3):
            report = isometry_spotcheck(f, self.pairs, [0.5, 1.0, math.pi])
            self.assertTrue(report.passed, report)
            self.assertEqual(report.witnesses, [])

    def test_dilation(self):
        f = make_affine(np.eye(3), np.zeros(3))
        report = isometry_spotcheck(f, [((1, 0, 0), (0, 1, 0))], [1.0])
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.max_deviation, (math.e - 1) * math.sqrt(2), places=12)
        self.assertEqual(len(report.witnesses), 1)
        self.assertEqual(report.verdict, 'fail')


@pytest.mark.parametrize("t", [0.0, 0.25, -1.5, 10.0])
def test_screw_period(t):
    # the z component grows linearly, the (x, y) part has period pi for l1 = 2
    f = screw_field(2.0, 1.0)
    p = flow_affine(f, (1.0, 0.0, 0.0), t)
    q = flow_affine(f, (1.0, 0.0, 0.0), t + math.pi)
    np.testing.assert_allclose(q - p, [0.0, 0.0, math.pi], rtol=0, atol=1e-11)


@pytest.mark.parametrize("l1,l2", [(1.0, 0.0), (0.0, 1.0), (2.0, 3.0)])
@pytest.mark.parametrize("t", [0.1, 1.0, math.pi])
def test_screw_matches_cylinder_curve(l1, l2, t):
    p0 = screw_curve(l1, l2, 0.0)
    np.testing.assert_allclose(flow_affine(screw_field(l1, l2), p0, t), screw_curve(l1, l2, t), rtol=0, atol=1e-11)


def test_random_pair_isometry():
    rng = np.random.default_rng(5)
    pairs = [(rng.uniform(-2, 2, 4), rng.uniform(-2, 2, 4)) for _ in range(20)]
    for f in (TORUS_X, TORUS_Y, TORUS_X + 0.5 * TORUS_Y):
        assert isometry_spotcheck(f, pairs, [0.3, 1.0, 2 * math.pi]).max_deviation <= 1e-10


def test_fourth_order_on_torus_field():
    f = make_expr_field(['z', 'w', '-x', '-y'])
    p0 = (0.6, 0.0, 0.8, 0.0)
    exact = flow_affine(TORUS_Y, p0, 1.0)
    coarse = np.linalg.norm(flow_numeric(f, p0, 1.0, step=0.125) - exact)
    fine = np.linalg.norm(flow_numeric(f, p0, 1.0, step=0.0625) - exact)
    assert 12 <= coarse / fine <= 20, coarse / fine


def test_isometry_fails_without_skew_part():
    rng = np.random.default_rng(31)
    for _ in range(25):
        K = rng.uniform(-1, 1, (3, 3))
        S = rng.uniform(-1, 1, (3, 3))
        f = make_affine(K - K.T + (S + S.T) / 2, rng.uniform(-1, 1, 3))
        pairs = [(rng.uniform(-2, 2, 3), rng.uniform(-2, 2, 3)) for _ in range(10)]
        report = isometry_spotcheck(f, pairs, [0.5, 1.0])
        assert not report.passed
        assert report.witnesses


def test_group_law_for_random_killing_fields():
    rng = np.random.default_rng(32)
    for _ in range(50):
        K = rng.uniform(-1, 1, (3, 3))
        f = make_affine(K - K.T, rng.uniform(-1, 1, 3))
        p = rng.uniform(-1, 1, 3)
        s, t = rng.uniform(-10, 10, 2)
        np.testing.assert_allclose(flow_affine(f, flow_affine(f, p, s), t), flow_affine(f, p, s + t),
                                   rtol=0, atol=1e-11)


def test_step_halving_on_torus_x():
    f = make_expr_field(['-y', 'x', '-w', 'z'])
    p0 = (0.6, 0.0, 0.8, 0.0)
    exact = flow_affine(TORUS_X, p0, 1.0)
    coarse = np.linalg.norm(flow_numeric(f, p0, 1.0, step=1e-2) - exact)
    fine = np.linalg.norm(flow_numeric(f, p0, 1.0, step=5e-3) - exact)
    assert 14 <= coarse / fine <= 18, coarse / fine
