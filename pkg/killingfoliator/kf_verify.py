import math
from typing import NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
import simplejson as json
from scipy.optimize import brentq
from tqdm import tqdm

from killingfoliator import kf_helpers as helpers
from killingfoliator.kf_classify import classify_r3
from killingfoliator.kf_config import config
from killingfoliator.kf_core import KFEngine, format_msg, DimensionMismatchError, NotKillingError, \
    NotOrthogonalAtAnchorError, NotTangentError, OpenOrbitError, UnknownScenarioError
from killingfoliator.kf_expr import Expression, parse_expr
from killingfoliator.kf_fields import AffineField, killing_check
from killingfoliator.kf_flow import flow_affine, trajectory
from killingfoliator.kf_lie import FieldFamily, bracket, closure, generic_rank
from killingfoliator.kf_orbit import orbit_dimension, sample_orbit, conserved_check

"""
Numeric verification of the foliation claims and the registered scenario suite.

Every scenario is a function returning a list of CheckResult, registered under its name with @scenario. Scenarios
are deterministic: all random points come from seeded generators.
"""

__license__ = 'MIT'

# field values below this norm are treated as zero when measuring angles
ZERO_FIELD = 1e-12


class CheckResult(NamedTuple):
    name: str
    passed: bool
    residual: float
    tolerance: float


def check(name, residual, tol):
    residual = float(residual)
    return CheckResult(name, bool(residual <= tol), residual, float(tol))


def expect(name, condition):
    """A yes/no check, reported with residual 0 or 1 against tolerance 0"""
    return CheckResult(name, bool(condition), 0.0 if condition else 1.0, 0.0)


class ScenarioReport(object):
    def __init__(self, name, checks):
        self.name = name
        self.checks = list(checks)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def verdict(self):
        return 'pass' if self.passed else 'fail'

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_frame(self):
        return pd.DataFrame([{'check': c.name, 'verdict': 'pass' if c.passed else 'fail', 'residual': c.residual,
                              'tolerance': c.tolerance} for c in self.checks],
                            columns=['check', 'verdict', 'residual', 'tolerance'])

    def to_dict(self):
        return {'scenario': self.name,
                'verdict': self.verdict,
                'checks': [{'check': c.name, 'passed': c.passed, 'residual': c.residual, 'tolerance': c.tolerance}
                           for c in self.checks]}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    def __str__(self):
        return '{}: {}\n{}'.format(self.name, self.verdict, self.to_frame().to_string(index=False))

    def __repr__(self):
        return '<ScenarioReport {} {} ({} checks)>'.format(self.name, self.verdict, len(self.checks))


class TransversalityReport(NamedTuple):
    passed: bool
    max_cosine: float
    tol: float
    worst_t: Optional[float]


def _unit(direction, dim):
    u = np.asarray(direction, dtype=float)
    if u.shape != (dim,):
        raise DimensionMismatchError('Direction of shape {} for R^{}'.format(u.shape, dim))
    norm = np.linalg.norm(u)
    if norm == 0.0:
        raise ValueError('Line direction must be nonzero')
    return u / norm


def _cosine(v, u):
    norm = np.linalg.norm(v)
    if norm <= ZERO_FIELD:
        return 0.0
    return abs(float(np.dot(v, u))) / norm


def riemannian_transversality_check(D, anchor, direction, sample_ts, tol=None):
    """
    Follow the straight line anchor + t * direction (a geodesic of R^n) and measure how far it is from being
    orthogonal to the leaves it crosses: the largest |cos| of the angle between the direction and any nonzero
    closure field value on the line.
    :type D: kf_lie.FieldFamily
    :param anchor: a point on the line; every family member must be orthogonal to the line there
    :param direction: nonzero direction, normalized here
    :param sample_ts: line parameters to sample
    :param tol: default config['ORTHOGONALITY_TOL']
    :return: TransversalityReport
    """
    tol = config['ORTHOGONALITY_TOL'] if tol is None else tol
    n = D.dim
    anchor = np.asarray(anchor, dtype=float)
    u = _unit(direction, n)
    g = D.closure()
    if generic_rank(g) == n:
        raise OpenOrbitError('{!r} has an open orbit; there is no transversal to check'.format(D))

    for name, f in zip(D.names, D.members):
        c = _cosine(f.evaluate(anchor), u)
        if c > tol:
            msg = 'Line direction {} is not orthogonal to {} at {} (cosine {})'.format(u.tolist(), name,
                                                                                      anchor.tolist(), c)
            KFEngine.log('WARNING', format_msg('riemannian_transversality_check', repr(D), msg,
                                               'NotOrthogonalAtAnchorError'))
            raise NotOrthogonalAtAnchorError(msg, c)

    max_cosine = 0.0
    worst_t = None
    for t in sample_ts:
        p = anchor + t * u
        for f in g.basis:
            c = _cosine(f.evaluate(p), u)
            if c > max_cosine:
                max_cosine, worst_t = c, float(t)
    return TransversalityReport(max_cosine <= tol, max_cosine, tol, worst_t)


def cylinder_points(count=16):
    """`count` points of the unit cylinder x^2 + y^2 = 1, spread in angle and height"""
    u = 2 * np.pi * np.arange(count) / count
    v = np.linspace(-1.0, 1.0, count)
    return np.column_stack([np.sin(u), np.cos(u), v])


def cylinder_killing_decompose(f, tol=None):
    """
    Write a Killing field tangent to the cylinder x^2 + y^2 = 1 as l1 * (y d/dx - x d/dy) + l2 * d/dz.
    :param f: AffineField or ExprField on R^3
    :param tol: tangency and agreement threshold, default config['TANGENCY_TOL']
    :return: (l1, l2)
    :raises NotTangentError: with the worst sample point, when f is not tangent or not of that form
    """
    tol = config['TANGENCY_TOL'] if tol is None else tol
    if f.dim != 3:
        raise DimensionMismatchError('The cylinder lives in R^3, got a field on R^{}'.format(f.dim))
    report = killing_check(f)
    if not report.passed:
        raise NotKillingError('Only Killing fields decompose on the cylinder', report)

    points = cylinder_points()
    values = f.evaluate_many(points)
    normal = points * np.array([1.0, 1.0, 0.0])
    radial = np.abs(np.sum(values * normal, axis=1))
    k = int(np.argmax(radial))
    if radial[k] > tol:
        raise NotTangentError('Field is not tangent to the cylinder.', tuple(points[k].tolist()), float(radial[k]))

    def generators(p):
        return np.column_stack([helpers.CYLINDER_X1.evaluate(p), helpers.CYLINDER_X2.evaluate(p)])

    # two points a quarter turn apart
    G = np.vstack([generators(points[0]), generators(points[4])])
    coeffs = np.linalg.lstsq(G, np.concatenate([values[0], values[4]]), rcond=None)[0]
    mismatch = np.array([np.linalg.norm(generators(p) @ coeffs - v) for p, v in zip(points, values)])
    k = int(np.argmax(mismatch))
    if mismatch[k] > tol:
        raise NotTangentError('Field is not a constant combination of the cylinder generators.',
                              tuple(points[k].tolist()), float(mismatch[k]))
    l1, l2 = (float(c) + 0.0 for c in coeffs)
    return l1, l2


class TangencyReport(NamedTuple):
    passed: bool
    max_residual: float
    tol: float
    worst_point: Tuple[float, ...]
    lie_derivative: Expression


def tangency_check(f, constraint, points, tol=None):
    """
    A field is tangent to the level set {constraint = c} iff its derivative along the field vanishes there.
    :param f: AffineField or ExprField
    :param constraint: Expression or expression text, e.g. 'x^2 + y^2 - 1'
    :param points: points of the level set, shape (m, n)
    :return: TangencyReport
    """
    tol = config['TANGENCY_TOL'] if tol is None else tol
    constraint = constraint if isinstance(constraint, Expression) else parse_expr(str(constraint), f.dim)
    field = f.to_expr_field() if isinstance(f, AffineField) else f
    lie = field.lie_derivative(constraint)
    points = np.asarray(points, dtype=float)
    residuals = np.abs(lie.evaluate_many(points))
    k = int(np.argmax(residuals))
    return TangencyReport(bool(residuals[k] <= tol), float(residuals[k]), tol, tuple(points[k].tolist()), lie)


class LengthReport(NamedTuple):
    passed: bool
    spread: float
    tol: float
    length: float


def constant_length_check(f, points, tol=None):
    """
    Compare |f(p)| across points. Integral curves of a Killing field of constant length are geodesics.
    :return: LengthReport with the spread max |f| - min |f| and the mean length
    """
    tol = config['TANGENCY_TOL'] if tol is None else tol
    lengths = np.linalg.norm(f.evaluate_many(np.asarray(points, dtype=float)), axis=1)
    spread = float(np.max(lengths) - np.min(lengths))
    return LengthReport(spread <= tol, spread, tol, float(np.mean(lengths)))


class UnrollingReport(NamedTuple):
    passed: bool
    u_rate: float
    v_rate: float
    max_deviation: float
    tol: float


def cylinder_unrolling_check(traj, tol=1e-10):
    """
    Geodesics of the unit cylinder are the curves that are straight in the unrolled coordinates
    x = sin u, y = cos u, z = v, i.e. with u' and v' constant.
    :type traj: kf_flow.Trajectory
    :return: UnrollingReport with the rates of u and v and the largest deviation from them
    """
    if traj.dim != 3:
        raise DimensionMismatchError('Unrolling needs a trajectory in R^3, got R^{}'.format(traj.dim))
    u = np.unwrap(np.arctan2(traj.points[:, 0], traj.points[:, 1]))
    v = traj.points[:, 2]
    dt = np.diff(traj.times)
    du = np.diff(u) / dt
    dv = np.diff(v) / dt
    deviation = float(max(np.max(np.abs(du - du[0])), np.max(np.abs(dv - dv[0]))))
    return UnrollingReport(deviation <= tol, float(du[0]), float(dv[0]), deviation, tol)


def leaf_separation(anchor, direction, invariant, level_a, level_b, t_bracket):
    """
    Distance along a transversal line between the leaves {invariant = level_a} and {invariant = level_b}.
    Each crossing is found by root bracketing on t_bracket = (t_lo, t_hi).
    :return: float, |t_a - t_b|
    """
    anchor = np.asarray(anchor, dtype=float)
    u = _unit(direction, anchor.shape[0])
    inv = invariant if isinstance(invariant, Expression) else parse_expr(str(invariant), anchor.shape[0])

    def crossing(level):
        return brentq(lambda t: inv.evaluate(anchor + t * u) - level, t_bracket[0], t_bracket[1],
                      xtol=1e-15, rtol=4 * np.finfo(float).eps)

    return abs(crossing(level_a) - crossing(level_b))


SCENARIOS = {}


def scenario(name):
    def register(func):
        SCENARIOS[name] = func
        return func
    return register


def _deviation(points, curve):
    return max(np.linalg.norm(p - c) for p, c in zip(points, curve))


def _sphere_points(rng, count, dim=4):
    p = rng.standard_normal((count, dim))
    return p / np.linalg.norm(p, axis=1)[:, None]


def _singular_circle(sign, count):
    """
    Points of S^3 with x = sign * w, y = -sign * z; sign +1 gives y*z - x*w = -1/2, sign -1 gives +1/2.
    """
    theta = 2 * np.pi * np.arange(count) / count
    x = np.cos(theta) / math.sqrt(2)
    y = np.sin(theta) / math.sqrt(2)
    return np.column_stack([x, y, -sign * y, sign * x])


def _circle_residual(sign, points):
    return float(np.max(np.maximum(np.abs(points[:, 0] - sign * points[:, 3]),
                                   np.abs(points[:, 1] + sign * points[:, 2]))))


@scenario('example1_basis')
def _example1_basis():
    names = ['X{}'.format(k + 1) for k in range(6)]
    checks = [check('killing_check {}'.format(name), killing_check(f).max_residual, 0.0)
              for name, f in zip(names, helpers.BASIS_R3)]
    g = closure(FieldFamily(helpers.BASIS_R3, names))
    checks.append(check('closure dimension 6', abs(g.size - 6), 0))
    worst = max(g.span_residual(bracket(f, h)) for f in helpers.BASIS_R3 for h in helpers.BASIS_R3)
    checks.append(check('pairwise brackets in span', worst, config['RANK_TOL']))
    x6 = bracket(helpers.X4, helpers.X5)
    checks.append(check('[X4, X5] = X6', max(np.max(np.abs(x6.A - helpers.X6.A)), np.max(np.abs(x6.b))), 0.0))
    return checks


@scenario('hopf_circle')
def _hopf_circle():
    checks = []
    for p0 in [(0.5, 0.5, 0.5, 0.5), (0.6, 0.0, 0.0, 0.8)]:
        traj = trajectory(helpers.HOPF, p0, 0.0, 2 * np.pi, 101)
        label = str(list(p0))
        sphere = float(np.max(np.abs(np.linalg.norm(traj.points, axis=1) - 1.0)))
        checks.append(check('stays on S^3 from {}'.format(label), sphere, 1e-10))
        closed = np.linalg.norm(flow_affine(helpers.HOPF, p0, 2 * np.pi) - np.asarray(p0))
        checks.append(check('returns at 2 pi from {}'.format(label), closed, 1e-10))
        curve = [helpers.hopf_curve(p0, t) for t in traj.times]
        checks.append(check('matches (z1 e^it, z2 e^it) from {}'.format(label), _deviation(traj.points, curve),
                            1e-11))
        tangency = tangency_check(helpers.HOPF, helpers.SPHERE_INVARIANT, traj.points)
        checks.append(check('tangent to S^3 from {}'.format(label), tangency.max_residual, config['TANGENCY_TOL']))
    return checks


@scenario('s3_torus')
def _s3_torus():
    X, Y = helpers.TORUS_X, helpers.TORUS_Y
    D = FieldFamily([X, Y], ['X', 'Y'])
    rng = np.random.default_rng(0)
    checks = [check('killing_check X', killing_check(X).max_residual, 0.0),
              check('killing_check Y', killing_check(Y).max_residual, 0.0)]
    xy = bracket(X, Y)
    checks.append(check('[X, Y] = 0', max(np.max(np.abs(xy.A)), np.max(np.abs(xy.b))), 0.0))

    points = _sphere_points(rng, 1000)
    lengths = [np.max(np.abs(np.linalg.norm(f.evaluate_many(points), axis=1) - 1.0)) for f in (X, Y)]
    checks.append(check('no critical points on S^3', max(lengths), 1e-12))
    commute = max(np.linalg.norm(flow_affine(X, flow_affine(Y, p, s), t) - flow_affine(Y, flow_affine(X, p, t), s))
                  for p in points[:20] for t, s in [(0.3, 1.1), (2.0, -0.7), (np.pi, 0.5)])
    checks.append(check('flows commute', commute, 1e-11))

    generic = sum(orbit_dimension(D, p) != 2 for p in points)
    checks.append(check('orbit dimension 2 at 1000 random points', generic, 0))
    for sign in (1, -1):
        circle = _singular_circle(sign, 100)
        label = 'x = w, y = -z' if sign == 1 else 'x = -w, y = z'
        drops = sum(orbit_dimension(D, p) != 1 for p in circle)
        checks.append(check('orbit dimension 1 on {}'.format(label), drops, 0))
        moved = np.array([flow_affine(f, p, t) for f in (X, Y) for p in circle[::10] for t in (0.4, 1.7, -2.9)])
        checks.append(check('{} flow-invariant'.format(label), _circle_residual(sign, moved), 1e-9))

    p0 = (0.6, 0.0, 0.8, 0.0)
    for name, f in (('X', X), ('Y', Y)):
        traj = trajectory(f, p0, 0.0, 2 * np.pi, 200)
        for inv in (helpers.SPHERE_INVARIANT, helpers.TORUS_INVARIANT):
            report = conserved_check(f, inv, traj)
            checks.append(check('{} conserved along {}'.format(inv, name), report.max_drift, report.tol))
            checks.append(check('L_{} ({}) = 0'.format(name, inv), report.lie_derivative_max,
                                config['LIE_DERIVATIVE_TOL']))
    y_traj = trajectory(Y, p0, 0.0, 2 * np.pi, 200)
    curve = [helpers.torus_y_curve(p0, t) for t in y_traj.times]
    checks.append(check('Y flow matches closed form', _deviation(y_traj.points, curve), 1e-11))
    checks.append(expect('x^2 + y^2 not conserved along Y', not conserved_check(Y, 'x^2 + y^2', y_traj).passed))

    cloud = sample_orbit(D, p0, 500, seed=0, invariants=[helpers.SPHERE_INVARIANT, helpers.TORUS_INVARIANT])
    for text, values in cloud.invariant_values:
        checks.append(check('{} constant on orbit cloud'.format(text), np.max(np.abs(values - values[0])), 1e-9))
    return checks


@scenario('cylinder_helix')
def _cylinder_helix():
    checks = []
    p0 = (1.0, 0.0, 0.0)
    for l1, l2 in [(1.0, 0.0), (0.0, 1.0), (2.0, 3.0)]:
        f = helpers.screw_field(l1, l2)
        label = '({}, {})'.format(l1, l2)
        traj = trajectory(f, p0, 0.0, np.pi, 50)
        curve = [helpers.screw_curve(l1, l2, t) for t in traj.times]
        checks.append(check('closed form {}'.format(label), _deviation(traj.points, curve), 1e-11))
        checks.append(check('constant speed {}'.format(label), constant_length_check(f, traj.points).spread,
                            1e-10))
        unrolled = cylinder_unrolling_check(traj)
        checks.append(check('straight when unrolled {}'.format(label), unrolled.max_deviation, unrolled.tol))
        checks.append(check('tangent to cylinder {}'.format(label),
                            tangency_check(f, 'x^2 + y^2', traj.points).max_residual, config['TANGENCY_TOL']))
        decomposed = cylinder_killing_decompose(f)
        checks.append(check('decomposes as {}'.format(label), max(abs(decomposed[0] - l1), abs(decomposed[1] - l2)),
                            1e-12))
        if l2 == 0.0:
            checks.append(check('circle for {}'.format(label), np.max(np.abs(traj.points[:, 2])), 1e-11))
        if l1 == 0.0:
            checks.append(check('straight line for {}'.format(label),
                                np.max(np.abs(traj.points[:, :2] - np.array([1.0, 0.0]))), 1e-11))
    return checks


@scenario('s2xr_nongeodesic')
def _s2xr_nongeodesic():
    f = helpers.S2XR_ROTATION
    p0 = (0.6, 0.0, 0.8, 0.25)
    traj = trajectory(f, p0, 0.0, 2 * np.pi, 101)
    points = traj.points
    checks = [check('killing_check', killing_check(f).max_residual, 0.0)]
    checks.append(check('stays on S^2 x R', np.max(np.abs(np.sum(points[:, :3] ** 2, axis=1) - 1.0)), 1e-10))
    radius = np.linalg.norm(points[:, :2], axis=1)
    checks.append(check('orbit radius 0.6', np.max(np.abs(radius - 0.6)), 1e-10))
    checks.append(expect('not a great circle of S^2', np.max(radius) < 1.0 - 1e-10))
    curve = [helpers.s2xr_curve(p0, t) for t in traj.times]
    checks.append(check('matches closed form', _deviation(points, curve), 1e-11))
    return checks


def _classification_error(result, expected):
    got = result.to_dict()
    if set(got) != set(expected) or got['type'] != expected['type']:
        return float('inf')
    return max([np.max(np.abs(np.asarray(got[k]) - np.asarray(expected[k]))) for k in expected if k != 'type'],
               default=0.0)


@scenario('r3_classification')
def _r3_classification():
    checks = []
    for name, (members, names) in helpers.FAMILIES.items():
        expected = helpers.EXPECTED_TYPES[name]
        result = classify_r3(FieldFamily(members, names))
        checks.append(check('{} is {}'.format(name, expected['type']), _classification_error(result, expected),
                            1e-9))
    return checks


@scenario('singular_riemannian')
def _singular_riemannian():
    families = {name: FieldFamily(*helpers.FAMILIES[name]) for name in ('spheres', 'cylinders', 'planes')}
    ts = [0.5, 1.0, 2.0]
    checks = []
    for name, anchor, direction in [('spheres', (0, 0, 0), (0, 0, 1)),
                                    ('cylinders', (0, 0, 0), (1, 0, 0)),
                                    ('planes', (0, 0, 0), (0, 0, 1))]:
        report = riemannian_transversality_check(families[name], anchor, direction, ts)
        checks.append(check('{} transversal'.format(name), report.max_cosine, report.tol))
    try:
        riemannian_transversality_check(families['spheres'], (0, 0, 1), (1, 0, 1), ts)
        refused = False
    except NotOrthogonalAtAnchorError:
        refused = True
    checks.append(expect('45 degree line refused', refused))
    try:
        riemannian_transversality_check(FieldFamily(*helpers.FAMILIES['whole_space']), (0, 0, 0), (0, 0, 1), ts)
        refused = False
    except OpenOrbitError:
        refused = True
    checks.append(expect('open orbit refused', refused))

    rng = np.random.default_rng(0)
    worst = 0.0
    for direction in _sphere_points(rng, 10, dim=3):
        separation = leaf_separation((0, 0, 0), direction, 'x^2 + y^2 + z^2', 0.25, 4.0, (0.0, 10.0))
        worst = max(worst, abs(separation - 1.5))
    checks.append(check('spheres r = 0.5 and r = 2 are 1.5 apart on radial lines', worst, 1e-12))
    return checks


def scenario_run(name):
    """
    :param name: a registered scenario name
    :return: ScenarioReport
    """
    if name not in SCENARIOS:
        raise UnknownScenarioError('Unknown scenario {!r}; registered: {}'.format(name, sorted(SCENARIOS)))
    report = ScenarioReport(name, SCENARIOS[name]())
    for c in report.failures():
        KFEngine.log('WARNING', format_msg('scenario_run', name, '{} residual {} > {}'.format(
            c.name, c.residual, c.tolerance)))
    KFEngine.log('INFO', format_msg('scenario_run', name, report.verdict))
    return report


def run_all(progress=None):
    """Run every registered scenario in registration order"""
    progress = config['SHOW_PROGRESS'] if progress is None else progress
    return [scenario_run(name) for name in tqdm(list(SCENARIOS), disable=not progress, desc='verify')]
