from typing import NamedTuple, Optional, Tuple

import numpy as np
import simplejson as json

from killingfoliator.kf_config import config
from killingfoliator.kf_core import KFEngine, format_msg, DimensionMismatchError, DegenerateFamilyError, \
    UnclassifiableConfigurationError
from killingfoliator.kf_lie import numerical_rank, generic_rank

"""
Classification of the orbit foliation of a family of Killing fields on R^3.

Every such foliation is one of seven types. The type is read off four linear-algebra computables of the bracket
closure g: the generic evaluation rank r, the common zero set Fix(g), the locus where the rank drops to 1 and
whether any member rotates.

    r   Fix     rotation    rank-1 locus    type
    3   -       -           -               WholeSpace
    2   point   yes         -               ConcentricSpheres (center = Fix)
    2   empty   no          -               ParallelPlanes
    2   empty   yes         line            ConcentricCylinders (axis = locus)
    2   empty   yes         none            ParallelPlanes
    1   line    yes         -               ConcentricCircles (axis = Fix)
    1   empty   no          -               ParallelLines
    1   empty   yes         line            Helices (axis = locus)

Anything else raises UnclassifiableConfigurationError.
"""

__license__ = 'MIT'

TAGS = ('ParallelLines', 'ConcentricCircles', 'Helices', 'ParallelPlanes', 'ConcentricSpheres',
        'ConcentricCylinders', 'WholeSpace')

PARAMETERS = {
    'ParallelLines': ('direction',),
    'ConcentricCircles': ('axis_point', 'axis_dir'),
    'Helices': ('axis_point', 'axis_dir', 'pitch'),
    'ParallelPlanes': ('normal',),
    'ConcentricSpheres': ('center',),
    'ConcentricCylinders': ('axis_point', 'axis_dir'),
    'WholeSpace': (),
}

# orbit dimensions that occur in a foliation of each type
ORBIT_DIMENSIONS = {
    'ParallelLines': {1},
    'ConcentricCircles': {0, 1},
    'Helices': {1},
    'ParallelPlanes': {2},
    'ConcentricSpheres': {0, 2},
    'ConcentricCylinders': {1, 2},
    'WholeSpace': {3},
}

SUBSPACE_KINDS = {0: 'point', 1: 'line', 2: 'plane', 3: 'whole-space'}

# coordinates below this are reported as 0.0
SNAP = 1e-12


def clean_vector(v):
    v = np.asarray(v, dtype=float)
    return np.where(np.abs(v) < SNAP, 0.0, v) + 0.0


def canonical_direction(v):
    """
    Unit vector along v, signed so that its first nonzero coordinate is positive.
    """
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError('Cannot normalize the zero vector')
    v = clean_vector(v / norm)
    nonzero = np.flatnonzero(v)
    if v[nonzero[0]] < 0:
        v = -v
    return v + 0.0


class AffineSubspace(NamedTuple):
    kind: str  # 'empty', 'point', 'line', 'plane' or 'whole-space'
    anchor: Optional[Tuple[float, ...]]  # point closest to the origin; None when empty
    directions: Tuple[Tuple[float, ...], ...]  # orthonormal

    @property
    def is_empty(self):
        return self.kind == 'empty'

    def distance(self, p):
        """Euclidean distance of p from the subspace"""
        if self.is_empty:
            raise ValueError('Distance to the empty set')
        d = np.asarray(p, dtype=float) - np.asarray(self.anchor)
        for u in self.directions:
            d = d - np.dot(d, u) * np.asarray(u)
        return float(np.linalg.norm(d))


def _stack(basis):
    M = np.vstack([f.A for f in basis])
    rhs = -np.concatenate([f.b for f in basis])
    return M, rhs


def _coefficient_scale(basis):
    return 1.0 + max([max(np.max(np.abs(f.A)), np.max(np.abs(f.b))) for f in basis], default=0.0)


def _solve_affine(M, rhs, tol, scale):
    """
    Least squares solution set of M.p = rhs.
    :return: (anchor or None, orthonormal kernel directions)
    """
    p, _, _, s = np.linalg.lstsq(M, rhs, rcond=None)
    if np.linalg.norm(M @ p - rhs) > tol * scale:
        return None, ()
    rank = numerical_rank(M)
    kernel = np.linalg.svd(M)[2][rank:]
    return p, kernel


def fixed_set(B, tol=None):
    """
    Common zero set of the basis fields: the solution set of the stacked system A_k.p = -b_k.
    :type B: kf_lie.LieAlgebraBasis
    :param tol: residual threshold, scaled by 1 + the largest coefficient; default config['FIXED_SET_TOL']
    :return: AffineSubspace
    """
    tol = config['FIXED_SET_TOL'] if tol is None else tol
    if B.dim != 3:
        raise DimensionMismatchError('Fixed sets are computed on R^3 only, got R^{}'.format(B.dim))
    if not B.basis:
        return AffineSubspace('whole-space', (0.0, 0.0, 0.0), tuple(tuple(r) for r in np.eye(3)))
    M, rhs = _stack(B.basis)
    anchor, kernel = _solve_affine(M, rhs, tol, _coefficient_scale(B.basis))
    if anchor is None:
        return AffineSubspace('empty', None, ())
    directions = tuple(tuple(canonical_direction(k).tolist()) for k in kernel)
    return AffineSubspace(SUBSPACE_KINDS[len(directions)], tuple(clean_vector(anchor).tolist()), directions)


class FoliationClass(object):
    """
    One of the seven foliation types with its geometric parameters.
    """

    def __init__(self, tag, **params):
        if tag not in PARAMETERS:
            raise ValueError('Unknown foliation type {}'.format(tag))
        if set(params) != set(PARAMETERS[tag]):
            raise ValueError('{} takes parameters {}, got {}'.format(tag, PARAMETERS[tag], sorted(params)))
        self.tag = tag
        self.params = {}
        for key in PARAMETERS[tag]:
            value = params[key]
            self.params[key] = float(value) + 0.0 if key == 'pitch' else tuple(clean_vector(value).tolist())

    def __getattr__(self, item):
        params = self.__dict__.get('params', {})
        if item in params:
            return params[item]
        raise AttributeError(item)

    @property
    def orbit_dimensions(self):
        return ORBIT_DIMENSIONS[self.tag]

    def to_dict(self):
        d = {'type': self.tag}
        for key in PARAMETERS[self.tag]:
            value = self.params[key]
            d[key] = value if key == 'pitch' else list(value)
        return d

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        return cls(d.pop('type'), **d)

    def __eq__(self, other):
        if not isinstance(other, FoliationClass):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.to_json(sort_keys=True))

    def __repr__(self):
        return '<FoliationClass {}>'.format(self.to_json())


def _rotation_parts(basis, tol, scale):
    return [f.A for f in basis if np.max(np.abs(f.A)) > tol * scale]


def _rotation_axis(rotations):
    """Common kernel of the stacked skew parts; must be one-dimensional"""
    S = np.vstack(rotations)
    rank = numerical_rank(S)
    if rank != 2:
        return None
    return canonical_direction(np.linalg.svd(S)[2][-1])


def _rank_one_axis(basis, u, tol, scale):
    """
    Points where every basis field is parallel to u: P(A_k.p + b_k) = 0 with P the projection orthogonal to u.
    :return: the line's point closest to the origin, or None if the system is inconsistent or not a line
    """
    P = np.eye(3) - np.outer(u, u)
    M = np.vstack([P @ f.A for f in basis])
    rhs = -np.concatenate([P @ f.b for f in basis])
    anchor, kernel = _solve_affine(M, rhs, tol, scale)
    if anchor is None or len(kernel) != 1 or abs(abs(np.dot(kernel[0], u)) - 1.0) > 1e-6:
        return None
    return anchor


def _plane_normal(basis, seed):
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((config['GENERIC_SAMPLES'], 3)) * config['GENERIC_RADIUS']
    values = np.hstack([f.evaluate_many(points).T for f in basis])
    return canonical_direction(np.linalg.svd(values)[0][:, -1])


def helix_pitch(f):
    """
    Axial advance per radian of a screw field A.x + b on R^3, with the rotation measured in the sense of
    X6 = y d/dx - x d/dy about +z: -(omega.b) / |omega|^2 with omega = (A32, A13, A21).
    Invariant under proper rigid motions and under scaling of f.

    Handedness: the sign is taken relative to the rotation sense of X6, which turns clockwise about +z. So
    X6 + 2.X3, whose integral curves form a left-handed helix in the usual right-handed frame, has pitch +2,
    and a right-handed helix such as X6 - 0.5.X3 has negative pitch. In terms of the axial vector, the pitch
    is positive exactly when omega.b < 0.
    """
    omega = np.array([f.A[2, 1], f.A[0, 2], f.A[1, 0]])
    return float(-np.dot(omega, f.b) / np.dot(omega, omega))


def _unclassifiable(D, r, fix, detail):
    msg = 'generic rank {}, fixed set {}: {}'.format(r, fix.kind, detail)
    KFEngine.log('ERROR', format_msg('classify_r3', repr(D), msg, 'UnclassifiableConfigurationError'))
    return UnclassifiableConfigurationError(msg)


def classify_r3(D, tol=None, seed=None):
    """
    Decide the foliation type of the orbits of a family of Killing fields on R^3.
    :type D: kf_lie.FieldFamily
    :param tol: fixed set and rank-1 locus residual threshold, default config['FIXED_SET_TOL']
    :param seed: seed of the generic rank sampling, default config['CLASSIFY_SEED']
    :return: FoliationClass
    """
    tol = config['FIXED_SET_TOL'] if tol is None else tol
    if D.dim != 3:
        raise DimensionMismatchError('The foliation classifier works on R^3 only, got R^{}'.format(D.dim))
    if all(f.is_zero() for f in D.members):
        raise DegenerateFamilyError('Every member of {!r} is identically zero'.format(D))

    g = D.closure()
    basis = g.basis
    scale = _coefficient_scale(basis)
    fix = fixed_set(g, tol)
    r = generic_rank(g, seed=seed)
    rotations = _rotation_parts(basis, tol, scale)

    result = None
    if r == 3:
        result = FoliationClass('WholeSpace')
    elif r == 2 and fix.kind == 'point':
        result = FoliationClass('ConcentricSpheres', center=fix.anchor)
    elif r == 2 and fix.is_empty:
        if not rotations:
            result = FoliationClass('ParallelPlanes', normal=_plane_normal(basis, seed))
        else:
            u = _rotation_axis(rotations)
            if u is None:
                raise _unclassifiable(D, r, fix, 'rotations without a common axis')
            anchor = _rank_one_axis(basis, u, tol, scale)
            if anchor is None:
                result = FoliationClass('ParallelPlanes', normal=_plane_normal(basis, seed))
            else:
                result = FoliationClass('ConcentricCylinders', axis_point=anchor, axis_dir=u)
    elif r == 1 and fix.kind == 'line':
        result = FoliationClass('ConcentricCircles', axis_point=fix.anchor, axis_dir=fix.directions[0])
    elif r == 1 and fix.is_empty:
        if not rotations:
            b = np.vstack([f.b for f in basis])
            result = FoliationClass('ParallelLines', direction=canonical_direction(np.linalg.svd(b)[2][0]))
        else:
            u = _rotation_axis(rotations)
            screw = max(basis, key=lambda f: np.linalg.norm(f.A))
            anchor = None if u is None else _rank_one_axis(basis, u, tol, scale)
            if anchor is None:
                raise _unclassifiable(D, r, fix, 'screw motion without an axis')
            result = FoliationClass('Helices', axis_point=anchor, axis_dir=u, pitch=helix_pitch(screw))

    if result is None:
        raise _unclassifiable(D, r, fix, 'outside the decision table')
    KFEngine.log('INFO', format_msg('classify_r3', repr(D), result.to_json()))
    return result
