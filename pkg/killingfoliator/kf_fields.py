import itertools
from typing import NamedTuple, List, Tuple

import numpy as np

from killingfoliator.kf_config import config
from killingfoliator.kf_core import KFEngine, format_msg, DimensionMismatchError, EvaluationError
from killingfoliator.kf_expr import Expression, parse_expr, constant, coordinate

"""
Vector fields on Euclidean R^n.

AffineField is the exact form x -> A.x + b, ExprField holds one parsed expression per component. A field is a
Killing field of the Euclidean metric iff its symmetrized Jacobian vanishes; for an affine field this is the
skewness of A.

The named basis of R^3 in kf_helpers uses X6 = -x d/dy + y d/dx, which rotates clockwise about +z.
"""

__license__ = 'MIT'


def _reject_metric(metric, dim):
    if metric is not None and not np.array_equal(np.asarray(metric, dtype=float), np.eye(dim)):
        raise ValueError('Only the Euclidean metric of R^{} is supported'.format(dim))


class AffineField(object):
    """
    The vector field xi(x) = A.x + b. Immutable.
    """

    def __init__(self, A, b, metric=None):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatchError('Linear part must be a square matrix, got shape {}'.format(A.shape))
        if b.shape != (A.shape[0],):
            raise DimensionMismatchError('Offset of shape {} does not match a {}x{} linear part'.format(
                b.shape, *A.shape))
        _reject_metric(metric, A.shape[0])
        A.setflags(write=False)
        b.setflags(write=False)
        self._A = A
        self._b = b

    @property
    def A(self):
        return self._A

    @property
    def b(self):
        return self._b

    @property
    def dim(self):
        return self._b.shape[0]

    def evaluate(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise DimensionMismatchError('Point of shape {} given to a field on R^{}'.format(p.shape, self.dim))
        return self._A @ p + self._b

    def evaluate_many(self, points):
        points = np.asarray(points, dtype=float)
        return points @ self._A.T + self._b

    __call__ = evaluate

    def is_skew(self):
        return bool(np.array_equal(self._A, -self._A.T))

    def is_zero(self):
        return not (np.any(self._A) or np.any(self._b))

    def has_linear_part(self):
        return bool(np.any(self._A))

    def to_expr_field(self):
        """
        The same field with expression components, for symbolic Lie derivatives.
        :return: ExprField
        """
        n = self.dim
        components = []
        for i in range(n):
            e = constant(self._b[i], n)
            for j in range(n):
                if self._A[i, j] != 0.0:
                    e = e + coordinate(j + 1, n) * self._A[i, j]
            components.append(e)
        return ExprField(components)

    def to_spec(self):
        return {'matrix': self._A.tolist(), 'offset': self._b.tolist()}

    def _check_dim(self, other):
        if other.dim != self.dim:
            raise DimensionMismatchError('Cannot combine fields on R^{} and R^{}'.format(self.dim, other.dim))

    def __add__(self, other):
        self._check_dim(other)
        return AffineField(self._A + other.A, self._b + other.b)

    def __sub__(self, other):
        self._check_dim(other)
        return AffineField(self._A - other.A, self._b - other.b)

    def __mul__(self, scalar):
        return AffineField(self._A * float(scalar), self._b * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return AffineField(-self._A, -self._b)

    def __eq__(self, other):
        if not isinstance(other, AffineField):
            return NotImplemented
        return np.array_equal(self._A, other.A) and np.array_equal(self._b, other.b)

    def __hash__(self):
        return hash((self._A.tobytes(), self._b.tobytes()))

    def __repr__(self):
        return '<AffineField dim={} A={} b={}>'.format(self.dim, self._A.tolist(), self._b.tolist())


class ExprField(object):
    """
    A vector field whose components are parsed expressions. Immutable.
    """

    def __init__(self, components, metric=None):
        """
        :param components: one Expression per coordinate
        :type components: list
        """
        components = tuple(components)
        if not components:
            raise ValueError('A field needs at least one component')
        dim = len(components)
        for c in components:
            if not isinstance(c, Expression):
                raise TypeError('Components must be Expression instances, got {!r}'.format(c))
            if c.dim != dim:
                raise DimensionMismatchError('Component {!r} lives on R^{}, the field has {} components'.format(
                    c.text, c.dim, dim))
        _reject_metric(metric, dim)
        self._components = components
        self._jacobian = None

    @property
    def components(self):
        return self._components

    @property
    def dim(self):
        return len(self._components)

    def evaluate(self, p):
        return np.array([c.evaluate(p) for c in self._components])

    def evaluate_many(self, points):
        return np.column_stack([c.evaluate_many(points) for c in self._components])

    __call__ = evaluate

    def jacobian(self):
        """
        :return: nested tuple J with J[i][j] = d xi_i / d x_j (0-based)
        """
        if self._jacobian is None:
            self._jacobian = tuple(tuple(c.differentiate(j + 1) for j in range(self.dim))
                                   for c in self._components)
        return self._jacobian

    def lie_derivative(self, inv):
        """
        The derivative of a scalar expression along this field, sum_i xi_i * d inv / d x_i.
        :type inv: Expression
        :return: Expression
        """
        if inv.dim != self.dim:
            raise DimensionMismatchError('Expression on R^{} given to a field on R^{}'.format(inv.dim, self.dim))
        result = constant(0.0, self.dim)
        for i, c in enumerate(self._components):
            result = result + c * inv.differentiate(i + 1)
        return result

    def to_spec(self):
        return {'components': [c.text for c in self._components]}

    def __repr__(self):
        return '<ExprField {}>'.format([c.text for c in self._components])


class KillingWitness(NamedTuple):
    i: int  # 1-based
    j: int  # 1-based
    point: Tuple[float, ...]
    residual: float


class KillingReport(NamedTuple):
    passed: bool
    witnesses: List[KillingWitness]
    mode: str  # 'exact-affine' or 'symbolic-grid'
    max_residual: float

    @property
    def verdict(self):
        return 'pass' if self.passed else 'fail'


def make_affine(A, b):
    """
    Store a field x -> A.x + b exactly, without symmetrizing anything.
    :param A: n x n linear part
    :param b: n-vector
    :return: AffineField
    """
    return AffineField(A, b)


def make_expr_field(components, dim=None):
    """
    :param components: expression texts or Expression objects, one per coordinate
    :param dim: ambient dimension, defaults to the number of components
    :return: ExprField
    """
    dim = len(components) if dim is None else dim
    if len(components) != dim:
        raise DimensionMismatchError('{} components given for a field on R^{}'.format(len(components), dim))
    return ExprField([c if isinstance(c, Expression) else parse_expr(str(c), dim) for c in components])


def sampling_grid(dim, points=None, half_width=None):
    """
    The default test lattice: `points` values per axis on [-half_width, half_width]^dim.
    :return: array of shape (points**dim, dim)
    """
    points = config['GRID_POINTS'] if points is None else points
    half_width = config['GRID_HALF_WIDTH'] if half_width is None else half_width
    if dim > config['GRID_MAX_DIM']:
        raise ValueError('No default grid above dimension {}; pass an explicit grid for R^{}'.format(
            config['GRID_MAX_DIM'], dim))
    axis = np.linspace(-half_width, half_width, points)
    return np.array(list(itertools.product(axis, repeat=dim)))


def killing_check(f, grid=None, tol=None):
    """
    Check the Killing criterion d xi_i/d x_j + d xi_j/d x_i = 0 (i != j), d xi_i/d x_i = 0.
    Affine fields are checked exactly on the stored matrix (tol is ignored). Expression fields are differentiated
    symbolically and the conditions are evaluated on `grid`.
    :param f: AffineField or ExprField
    :param grid: sample points, shape (m, n); default sampling_grid(n)
    :param tol: maximal allowed residual on the grid, default config['KILLING_TOL']
    :return: KillingReport
    """
    n = f.dim
    witnesses = []
    if isinstance(f, AffineField):
        A = f.A
        origin = tuple([0.0] * n)
        for i in range(n):
            for j in range(i, n):
                residual = A[i, i] if i == j else A[i, j] + A[j, i]
                if residual != 0.0:
                    witnesses.append(KillingWitness(i + 1, j + 1, origin, float(residual)))
        max_residual = max([abs(w.residual) for w in witnesses], default=0.0)
        report = KillingReport(not witnesses, witnesses, 'exact-affine', max_residual)
    else:
        tol = config['KILLING_TOL'] if tol is None else tol
        grid = sampling_grid(n) if grid is None else np.asarray(grid, dtype=float)
        if len(grid) == 0:
            raise ValueError('Killing check needs a nonempty grid')
        J = f.jacobian()
        max_residual = 0.0
        for i in range(n):
            for j in range(i, n):
                condition = J[i][i] if i == j else J[i][j] + J[j][i]
                values = condition.evaluate_many(grid)
                k = int(np.argmax(np.abs(values)))
                worst = float(abs(values[k]))
                max_residual = max(max_residual, worst)
                if worst > tol:
                    witnesses.append(KillingWitness(i + 1, j + 1, tuple(grid[k].tolist()), float(values[k])))
        report = KillingReport(not witnesses, witnesses, 'symbolic-grid', max_residual)

    if not report.passed:
        KFEngine.log('INFO', format_msg('killing_check', repr(f), 'failed at {}'.format(
            [(w.i, w.j) for w in witnesses]), report.mode))
    return report


def as_affine(f, grid=None, tol=None):
    """
    Affinity detection. An ExprField whose second derivatives vanish on the grid is read off as A = Jacobian at
    the origin, b = value at the origin.
    :param f: AffineField or ExprField
    :return: AffineField, or None if `f` is not affine
    """
    if isinstance(f, AffineField):
        return f
    tol = config['AFFINE_TOL'] if tol is None else tol
    grid = sampling_grid(f.dim) if grid is None else np.asarray(grid, dtype=float)
    n = f.dim
    J = f.jacobian()
    origin = np.zeros(n)
    try:
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if np.max(np.abs(J[i][j].differentiate(k + 1).evaluate_many(grid))) > tol:
                        return None
        A = [[J[i][j].evaluate(origin) for j in range(n)] for i in range(n)]
        b = f.evaluate(origin)
    except EvaluationError:
        return None
    return AffineField(A, b)


def conjugate_field(f, R, t):
    """
    Push an affine field forward under the rigid motion p -> R.p + t:
    A' = R.A.R^T, b' = R.b - A'.t
    The result of a skew linear part is projected back onto exactly skew matrices.
    :param R: n x n orthogonal matrix (R^T R = I within 1e-12)
    :param t: n-vector
    :return: AffineField
    """
    R = np.asarray(R, dtype=float)
    t = np.asarray(t, dtype=float)
    n = f.dim
    if R.shape != (n, n) or t.shape != (n,):
        raise DimensionMismatchError('Rigid motion of shapes {}, {} given for a field on R^{}'.format(
            R.shape, t.shape, n))
    if np.max(np.abs(R.T @ R - np.eye(n))) > 1e-12:
        raise ValueError('R is not orthogonal')
    A = R @ f.A @ R.T
    if f.is_skew():
        A = (A - A.T) / 2.0
    b = R @ f.b - A @ t
    return AffineField(A, b)


def eval_field(f, p):
    return f.evaluate(p)
