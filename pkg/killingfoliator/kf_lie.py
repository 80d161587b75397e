from itertools import combinations

import numpy as np
import pandas as pd

from killingfoliator.kf_config import config
from killingfoliator.kf_core import KFEngine, format_msg, DimensionMismatchError, NotKillingError, \
    NonAffineFieldError
from killingfoliator.kf_fields import AffineField, ExprField, killing_check, as_affine
from killingfoliator.kf_expr import constant

"""
Lie brackets and bracket closure of families of affine Killing fields.

Bracket convention: [f, g]^i = f^j d_j g^i - g^j d_j f^i. For f = (A, a), g = (B, b) this is the affine field
(B.A - A.B, B.a - A.b).
"""

__license__ = 'MIT'


def numerical_rank(M, tol=None):
    """
    Number of singular values of M above tol * (largest singular value).
    """
    tol = config['RANK_TOL'] if tol is None else tol
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def vectorize(f):
    """
    Coordinates of a Killing field in the isometry algebra: the strict upper triangle of A followed by b.
    """
    iu = np.triu_indices(f.dim, 1)
    return np.concatenate([f.A[iu], f.b])


def bracket(f, g):
    """
    Lie bracket of two affine fields.
    :type f: AffineField
    :type g: AffineField
    :return: AffineField (B.A - A.B, B.a - A.b)
    """
    if f.dim != g.dim:
        raise DimensionMismatchError('Cannot bracket fields on R^{} and R^{}'.format(f.dim, g.dim))
    A, a = f.A, f.b
    B, b = g.A, g.b
    C = B @ A - A @ B
    if f.is_skew() and g.is_skew():
        # skew inputs give a skew bracket; project away round-off
        C = (C - C.T) / 2.0
    return AffineField(C, B @ a - A @ b)


def bracket_expr(f, g):
    """
    Symbolic Lie bracket of two fields of any kind. Used for coefficient-function fields such as
    lambda1(x, y, z) X1 + lambda2(x, y, z) X2; these are never adjoined by closure.
    :return: ExprField
    """
    f = f.to_expr_field() if isinstance(f, AffineField) else f
    g = g.to_expr_field() if isinstance(g, AffineField) else g
    if f.dim != g.dim:
        raise DimensionMismatchError('Cannot bracket fields on R^{} and R^{}'.format(f.dim, g.dim))
    n = f.dim
    Jf = f.jacobian()
    Jg = g.jacobian()
    components = []
    for i in range(n):
        c = constant(0.0, n)
        for j in range(n):
            c = c + f.components[j] * Jg[i][j] - g.components[j] * Jf[i][j]
        components.append(c)
    return ExprField(components)


class FieldFamily(object):
    """
    A nonempty family of affine Killing fields on R^n. Expression fields are accepted when they are affine.
    """

    def __init__(self, members, names=None):
        """
        :param members: AffineField or ExprField instances
        :type members: list
        :param names: optional display names, one per member
        :type names: list
        """
        members = list(members)
        if not members:
            raise ValueError('A field family must have at least one member')
        names = ['X{}'.format(k + 1) for k in range(len(members))] if names is None else list(names)
        if len(names) != len(members):
            raise ValueError('{} names given for {} fields'.format(len(names), len(members)))
        affine = []
        for name, f in zip(names, members):
            g = as_affine(f) if isinstance(f, ExprField) else f
            if g is None:
                raise NonAffineFieldError('Field {} ({!r}) is not affine'.format(name, f))
            report = killing_check(g)
            if not report.passed:
                raise NotKillingError('Field {} is not a Killing field'.format(name), report)
            affine.append(g)
        dim = affine[0].dim
        for name, f in zip(names, affine):
            if f.dim != dim:
                raise DimensionMismatchError('Field {} lives on R^{}, the family on R^{}'.format(name, f.dim, dim))
        self._members = tuple(affine)
        self._names = tuple(names)
        self._closure_cache = {}

    @property
    def members(self):
        return self._members

    @property
    def names(self):
        return self._names

    @property
    def dim(self):
        return self._members[0].dim

    def __len__(self):
        return len(self._members)

    def __iter__(self):
        return iter(self._members)

    def __eq__(self, other):
        if not isinstance(other, FieldFamily):
            return NotImplemented
        return self._members == other.members

    def __hash__(self):
        return hash(self._members)

    def __repr__(self):
        return '<FieldFamily dim={} {}>'.format(self.dim, list(self._names))

    def closure(self, tol=None):
        """
        The bracket closure, computed on first use and reused afterwards.
        :return: LieAlgebraBasis
        """
        tol = config['RANK_TOL'] if tol is None else tol
        if tol not in self._closure_cache:
            self._closure_cache[tol] = closure(self, tol)
        return self._closure_cache[tol]


class LieAlgebraBasis(object):
    """
    Linearly independent affine Killing fields spanning a bracket-closed algebra.
    """

    def __init__(self, dim, basis, generation_depth, tol=None):
        self._dim = dim
        self._basis = tuple(basis)
        self.generation_depth = generation_depth
        self.tol = config['RANK_TOL'] if tol is None else tol

    @property
    def dim(self):
        return self._dim

    @property
    def basis(self):
        return self._basis

    @property
    def size(self):
        return len(self._basis)

    def __len__(self):
        return len(self._basis)

    def __iter__(self):
        return iter(self._basis)

    def matrix(self):
        """:return: array with one vectorized basis element per row"""
        n = self._dim
        return np.array([vectorize(f) for f in self._basis]).reshape(self.size, n * (n + 1) // 2)

    def span_residual(self, f):
        """
        Relative distance of the vectorized field from the span of the basis.
        """
        v = vectorize(f)
        if not self._basis:
            return float(np.linalg.norm(v) / (1.0 + np.linalg.norm(v)))
        M = self.matrix()
        coeffs = np.linalg.lstsq(M.T, v, rcond=None)[0]
        return float(np.linalg.norm(M.T @ coeffs - v) / (1.0 + np.linalg.norm(v)))

    def contains(self, f, tol=None):
        tol = self.tol if tol is None else tol
        return self.span_residual(f) <= tol

    def bracket_residual(self):
        """Worst span residual over all pairwise brackets of the basis"""
        return max([self.span_residual(bracket(f, g)) for f, g in combinations(self._basis, 2)], default=0.0)

    def as_family(self):
        return FieldFamily(self._basis, names=['B{}'.format(k + 1) for k in range(self.size)])

    def to_frame(self):
        """
        Basis coordinates as a table: one row per basis element, columns a_ij (i < j) of the linear part and b_i.
        """
        n = self._dim
        columns = ['a{}{}'.format(i + 1, j + 1) for i, j in zip(*np.triu_indices(n, 1))]
        columns += ['b{}'.format(i + 1) for i in range(n)]
        return pd.DataFrame(self.matrix().reshape(self.size, len(columns)), columns=columns,
                            index=['B{}'.format(k + 1) for k in range(self.size)])

    def __repr__(self):
        return '<LieAlgebraBasis dim={} size={} depth={}>'.format(self._dim, self.size, self.generation_depth)


def closure(D, tol=None):
    """
    Bracket closure of a family. Brackets are adjoined in breadth-first rounds over all pairs of the current
    basis; a bracket is kept only if it enlarges the span of the vectorized fields.
    :type D: FieldFamily
    :param tol: relative rank tolerance, default config['RANK_TOL']
    :return: LieAlgebraBasis
    """
    tol = config['RANK_TOL'] if tol is None else tol
    n = D.dim
    cap = n * (n + 1) // 2
    basis = []
    rows = []

    def adjoin(f):
        if len(basis) >= cap:
            return False
        candidate = rows + [vectorize(f)]
        if numerical_rank(candidate, tol) > len(basis):
            basis.append(f)
            rows.append(candidate[-1])
            return True
        return False

    for f in D.members:
        adjoin(f)

    depth = 0
    while 0 < len(basis) < cap:
        current = list(basis)
        added = False
        for f, g in combinations(current, 2):
            if adjoin(bracket(f, g)):
                added = True
        if not added:
            break
        depth += 1

    KFEngine.log('INFO', format_msg('closure', repr(D), 'dimension {} after {} rounds'.format(len(basis), depth)))
    return LieAlgebraBasis(n, basis, depth, tol)


def same_span(B1, B2, tol=None):
    """Mutual rank test: both bases span the same subspace of the isometry algebra"""
    tol = config['RANK_TOL'] if tol is None else tol
    M1, M2 = B1.matrix(), B2.matrix()
    r1 = numerical_rank(M1, tol)
    r2 = numerical_rank(M2, tol)
    return r1 == r2 == numerical_rank(np.vstack([M1, M2]), tol)


def evaluation_rank(B, p, tol=None):
    """
    Dimension of the span of the basis fields evaluated at p; the orbit dimension at p.
    :type B: LieAlgebraBasis
    :param p: point in R^n
    :return: int
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (B.dim,):
        raise DimensionMismatchError('Point of shape {} given to a basis on R^{}'.format(p.shape, B.dim))
    if not B.basis:
        return 0
    values = np.column_stack([f.evaluate(p) for f in B.basis])
    return numerical_rank(values, tol)


def generic_rank(B, samples=None, seed=None, radius=None, tol=None):
    """
    Maximal evaluation rank over seeded random points (standard normal, scaled by `radius`).
    :return: int
    """
    samples = config['GENERIC_SAMPLES'] if samples is None else samples
    seed = config['CLASSIFY_SEED'] if seed is None else seed
    radius = config['GENERIC_RADIUS'] if radius is None else radius
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((samples, B.dim)) * radius
    return max(evaluation_rank(B, p, tol) for p in points)
