import unittest
from unittest import mock

import numpy as np
import pytest
import simplejson as json

from killingfoliator.kf_classify import classify_r3, fixed_set, helix_pitch, canonical_direction, clean_vector, \
    FoliationClass, AffineSubspace, TAGS
from killingfoliator.kf_core import DegenerateFamilyError, DimensionMismatchError, \
    UnclassifiableConfigurationError
from killingfoliator.kf_fields import make_affine, conjugate_field
from killingfoliator.kf_helpers import X1, X2, X3, X4, X5, X6, TORUS_X, TORUS_Y, FAMILIES, EXPECTED_TYPES, \
    random_rigid_motion
from killingfoliator.kf_lie import FieldFamily, LieAlgebraBasis, closure
from killingfoliator.kf_orbit import dimension_stratification, orbit_dimension


def assert_class(result, expected, atol=1e-9):
    got = result.to_dict()
    assert got['type'] == expected['type'], (got, expected)
    assert set(got) == set(expected), (got, expected)
    for key, value in expected.items():
        if key != 'type':
            np.testing.assert_allclose(got[key], value, rtol=0, atol=atol, err_msg=key)


def moved(expected, R, t):
    """The classification of a family pushed forward by p -> R.p + t"""
    d = dict(expected)
    for key in ('direction', 'axis_dir', 'normal'):
        if key in d:
            d[key] = canonical_direction(R @ np.asarray(d[key])).tolist()
    if 'center' in d:
        d['center'] = (R @ np.asarray(d['center']) + t).tolist()
    if 'axis_point' in d:
        u = np.asarray(d['axis_dir'])
        q = R @ np.asarray(d['axis_point']) + t
        d['axis_point'] = (q - np.dot(q, u) * u).tolist()
    return d


class TestFixedSet(unittest.TestCase):
    def test_kinds(self):
        point = fixed_set(closure(FieldFamily([X4, X5])))
        self.assertEqual(point.kind, 'point')
        np.testing.assert_allclose(point.anchor, [0, 0, 0], atol=1e-15)

        line = fixed_set(closure(FieldFamily([X6])))
        self.assertEqual(line.kind, 'line')
        self.assertEqual(line.directions, ((0.0, 0.0, 1.0),))

        self.assertTrue(fixed_set(closure(FieldFamily([X1]))).is_empty)
        self.assertTrue(fixed_set(closure(FieldFamily([X6, X3]))).is_empty)
        self.assertEqual(fixed_set(LieAlgebraBasis(3, [], 0)).kind, 'whole-space')

    def test_shifted_axis(self):
        f = conjugate_field(X6, np.eye(3), [1.0, 2.0, 0.0])
        line = fixed_set(closure(FieldFamily([f])))
        self.assertEqual(line.kind, 'line')
        np.testing.assert_allclose(line.anchor, [1, 2, 0], rtol=0, atol=1e-12)
        self.assertAlmostEqual(line.distance((4, 6, 9)), 5.0, places=12)

    def test_only_r3(self):
        with self.assertRaises(DimensionMismatchError):
            fixed_set(closure(FieldFamily([TORUS_X])))

    def test_distance(self):
        plane = AffineSubspace('plane', (0.0, 0.0, 1.0), ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)))
        self.assertEqual(plane.distance((5, -3, 4)), 3.0)
        with self.assertRaises(ValueError):
            AffineSubspace('empty', None, ()).distance((0, 0, 0))


class TestHelpers(unittest.TestCase):
    def test_canonical_direction(self):
        np.testing.assert_array_equal(canonical_direction((0, -2, 0)), [0, 1, 0])
        np.testing.assert_allclose(canonical_direction((-1, 1, 0)), [np.sqrt(0.5), -np.sqrt(0.5), 0])
        # a first coordinate below the snap threshold does not decide the sign
        np.testing.assert_array_equal(canonical_direction((1e-14, 0, -1)), [0, 0, 1])
        with self.assertRaises(ValueError):
            canonical_direction((0, 0, 0))

    def test_clean_vector(self):
        v = clean_vector([1e-13, -1e-13, 0.5])
        np.testing.assert_array_equal(v, [0, 0, 0.5])
        self.assertFalse(np.signbit(v[1]))

    def test_helix_pitch(self):
        self.assertEqual(helix_pitch(X6 + 2.0 * X3), 2.0)
        self.assertEqual(helix_pitch(3.0 * (X6 + 2.0 * X3)), 2.0)
        self.assertEqual(helix_pitch(-X6 + 2.0 * X3), -2.0)
        self.assertEqual(helix_pitch(X6 + X1), 0.0)

    def test_pitch_sign_is_opposite_to_torsion(self):
        # positive pitch means a left-handed helix, i.e. negative torsion
        rng = np.random.default_rng(11)
        for _ in range(40):
            k = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 3.0)
            c = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
            R, t = random_rigid_motion(rng)
            f = conjugate_field(c * (X6 + k * X3), R, t)
            p = rng.uniform(-3, 3, 3)
            v = f.evaluate(p)
            a = f.A @ v
            torsion = np.dot(np.cross(v, a), f.A @ a)
            self.assertLess(np.sign(helix_pitch(f)) * np.sign(torsion), 0, (k, c))
        self.assertLess(helix_pitch(X6 - 0.5 * X3), 0.0)


class TestFoliationClass(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(ValueError):
            FoliationClass('Torus')
        with self.assertRaises(ValueError):
            FoliationClass('Helices', axis_point=(0, 0, 0), axis_dir=(0, 0, 1))
        with self.assertRaises(ValueError):
            FoliationClass('WholeSpace', center=(0, 0, 0))

    def test_dict_and_json(self):
        c = FoliationClass('Helices', axis_point=(0, 0, 0), axis_dir=(0, 0, 1), pitch=2)
        self.assertEqual(c.to_dict(), EXPECTED_TYPES['helix'])
        self.assertEqual(FoliationClass.from_dict(c.to_dict()), c)
        self.assertEqual(json.loads(c.to_json()), EXPECTED_TYPES['helix'])
        self.assertEqual(c.pitch, 2.0)
        self.assertEqual(c.axis_dir, (0.0, 0.0, 1.0))
        self.assertEqual(len({c, FoliationClass.from_dict(EXPECTED_TYPES['helix'])}), 1)
        with self.assertRaises(AttributeError):
            c.center

    def test_orbit_dimensions(self):
        self.assertEqual(FoliationClass('ConcentricSpheres', center=(0, 0, 0)).orbit_dimensions, {0, 2})
        self.assertEqual(FoliationClass('WholeSpace').orbit_dimensions, {3})


class TestClassify(unittest.TestCase):
    def test_table(self):
        for name, (members, names) in FAMILIES.items():
            assert_class(classify_r3(FieldFamily(members, names)), EXPECTED_TYPES[name])
        self.assertEqual(sorted(EXPECTED_TYPES[name]['type'] for name in FAMILIES), sorted(TAGS))

    def test_closure_matters(self):
        assert_class(classify_r3(FieldFamily([X4, X5])), EXPECTED_TYPES['spheres'])
        # rotating d/dx produces d/dy, the orbits are horizontal planes
        assert_class(classify_r3(FieldFamily([X6, X1])), {'type': 'ParallelPlanes', 'normal': [0, 0, 1]})

    def test_scale_invariant(self):
        for name, (members, names) in FAMILIES.items():
            scaled = [c * f for c, f in zip([3.0, -2.0, 0.5, 7.0, -1.0, 4.0], members)]
            assert_class(classify_r3(FieldFamily(scaled)), EXPECTED_TYPES[name])

    def test_rigid_motion_equivariance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            R, t = random_rigid_motion(rng)
            for name, (members, names) in FAMILIES.items():
                D = FieldFamily([conjugate_field(f, R, t) for f in members], names)
                assert_class(classify_r3(D), moved(EXPECTED_TYPES[name], R, t), atol=1e-8)

    def test_orbit_dimensions_agree_with_stratification(self):
        for name, (members, names) in FAMILIES.items():
            D = FieldFamily(members, names)
            result = classify_r3(D)
            present = dimension_stratification(D, (-1, 1), 7).dimensions_present()
            self.assertTrue(present <= result.orbit_dimensions, (name, present))
        self.assertEqual(orbit_dimension(FieldFamily(*FAMILIES['circles']), (0, 0, 0.5)), 0)
        self.assertEqual(orbit_dimension(FieldFamily(*FAMILIES['spheres']), (0, 0, 0)), 0)

    def test_seed_does_not_matter(self):
        for seed in (1, 2, 3):
            assert_class(classify_r3(FieldFamily(*FAMILIES['planes']), seed=seed), EXPECTED_TYPES['planes'])

    def test_degenerate(self):
        zero = make_affine(np.zeros((3, 3)), np.zeros(3))
        with self.assertRaises(DegenerateFamilyError):
            classify_r3(FieldFamily([zero, zero]))

    def test_dimension(self):
        with self.assertRaises(DimensionMismatchError):
            classify_r3(FieldFamily([TORUS_X, TORUS_Y]))

    def test_unclassifiable(self):
        with mock.patch('killingfoliator.kf_classify.generic_rank', return_value=1):
            with self.assertRaises(UnclassifiableConfigurationError):
                classify_r3(FieldFamily(*FAMILIES['spheres']))


@pytest.mark.parametrize("members,expected", [
    ([X1 + X2], {'type': 'ParallelLines', 'direction': [np.sqrt(0.5), np.sqrt(0.5), 0]}),
    ([X2, X3], {'type': 'ParallelPlanes', 'normal': [1, 0, 0]}),
    ([X6 - 0.5 * X3], {'type': 'Helices', 'axis_point': [0, 0, 0], 'axis_dir': [0, 0, 1], 'pitch': -0.5}),
    ([X4, X1], {'type': 'ConcentricCylinders', 'axis_point': [0, 0, 0], 'axis_dir': [1, 0, 0]}),
    ([X1, X2, X3], {'type': 'WholeSpace'}),
])
def test_more_families(members, expected):
    assert_class(classify_r3(FieldFamily(members)), expected)


CLOSURE_CASES = [FAMILIES[name] for name in sorted(FAMILIES)] + [
    ((X6, X1), ('X6', 'X1')),
    ((X4, X5), ('X4', 'X5')),
    ((X6 + 2.0 * X3, X1 + X2), ('H', 'T')),
]


@pytest.mark.parametrize("members,names", CLOSURE_CASES, ids=[','.join(c[1]) for c in CLOSURE_CASES])
def test_closure_does_not_change_the_class(members, names):
    D = FieldFamily(members, names)
    closed = closure(D).as_family()
    assert_class(classify_r3(closed), classify_r3(D).to_dict())
    rng = np.random.default_rng(len(names))
    R, t = random_rigid_motion(rng)
    moved_family = FieldFamily([conjugate_field(f, R, t) for f in members], names)
    assert_class(classify_r3(closure(moved_family).as_family()), classify_r3(moved_family).to_dict(), atol=1e-8)
