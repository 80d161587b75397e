import itertools
from typing import NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from killingfoliator.kf_config import config
from killingfoliator.kf_core import KFEngine, format_msg, DimensionMismatchError
from killingfoliator.kf_expr import Expression, parse_expr
from killingfoliator.kf_fields import AffineField, sampling_grid
from killingfoliator.kf_flow import flow_affine
from killingfoliator.kf_lie import evaluation_rank

"""
Orbits of families of Killing fields: orbit dimension, stratification of a box by orbit dimension, random-walk
samples of a single orbit and conserved quantities along flows.

The orbit dimension at p is the evaluation rank of the bracket closure at p (orbit theorem).
"""

__license__ = 'MIT'


def orbit_dimension(D, p, tol=None):
    """
    :type D: kf_lie.FieldFamily
    :param p: point in R^n
    :return: int
    """
    return evaluation_rank(D.closure(), p, tol)


class StratificationSummary(object):
    def __init__(self, lower, upper, resolution, counts, representatives):
        """
        :param lower: lower corner of the box
        :param upper: upper corner of the box
        :param resolution: grid points per axis
        :param counts: dict, orbit dimension -> number of grid nodes, for every dimension 0..n
        :param representatives: dict, orbit dimension -> first grid node found with that dimension
        """
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.resolution = resolution
        self.counts = counts
        self.representatives = representatives

    @property
    def total(self):
        return sum(self.counts.values())

    def dimensions_present(self):
        return {d for d, c in self.counts.items() if c > 0}

    def to_frame(self):
        rows = []
        for d in sorted(self.counts):
            rep = self.representatives.get(d)
            rows.append({'dimension': d, 'nodes': self.counts[d],
                         'representative': '' if rep is None else ','.join(repr(float(v)) for v in rep)})
        return pd.DataFrame(rows, columns=['dimension', 'nodes', 'representative'])

    def __repr__(self):
        return '<StratificationSummary {}>'.format(self.counts)


def _box_corners(box, dim):
    lower, upper = box
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (dim,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (dim,))
    if np.any(lower > upper):
        raise ValueError('Box lower corner {} exceeds upper corner {}'.format(lower, upper))
    return lower, upper


def dimension_stratification(D, box, resolution, tol=None, progress=None):
    """
    Orbit dimension at every node of a regular grid.
    :type D: kf_lie.FieldFamily
    :param box: (lower, upper); each corner a scalar (same on every axis) or an n-vector
    :param resolution: grid points per axis, >= 2
    :param progress: show a tqdm bar, default config['SHOW_PROGRESS']
    :return: StratificationSummary
    """
    if resolution < 2:
        raise ValueError('Resolution must be at least 2, got {}'.format(resolution))
    progress = config['SHOW_PROGRESS'] if progress is None else progress
    n = D.dim
    lower, upper = _box_corners(box, n)
    axes = [np.linspace(lower[i], upper[i], resolution) for i in range(n)]
    basis = D.closure()
    counts = {d: 0 for d in range(n + 1)}
    representatives = {}
    nodes = itertools.product(*axes)
    for node in tqdm(nodes, total=resolution ** n, disable=not progress, desc='stratify'):
        d = evaluation_rank(basis, np.array(node), tol)
        counts[d] += 1
        representatives.setdefault(d, tuple(float(v) for v in node))
    KFEngine.log('INFO', format_msg('dimension_stratification', repr(D), 'counts {}'.format(counts)))
    return StratificationSummary(lower, upper, resolution, counts, representatives)


def _coordinate_names(dim):
    if dim <= 4:
        return ['x', 'y', 'z', 'w'][:dim]
    return ['x{}'.format(i + 1) for i in range(dim)]


class PointCloud(object):
    """
    A finite sample of one orbit, with optional invariant values per point.
    """

    def __init__(self, points, provenance=None, invariant_values=None):
        """
        :param points: array of shape (m, n)
        :param provenance: dict describing the generating family and start point
        :param invariant_values: list of (expression text, per-point values)
        """
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2:
            raise DimensionMismatchError('Point cloud needs a 2-d array, got shape {}'.format(self.points.shape))
        self.points.setflags(write=False)
        self.provenance = provenance or {}
        self.invariant_values = list(invariant_values or [])

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def to_frame(self):
        frame = pd.DataFrame(self.points, columns=['x{}'.format(i + 1) for i in range(self.dim)])
        for text, values in self.invariant_values:
            frame[text] = values
        return frame

    def to_csv(self, path=None):
        """Columns x1,...,xn followed by one column per invariant, headed by its expression text"""
        return self.to_frame().to_csv(path, index=False)

    def to_ply(self, path):
        """
        ASCII PLY: one vertex element with float properties x, y, z[, w] and inv1, inv2, ... for the invariants.
        """
        names = _coordinate_names(self.dim)
        inv_names = ['inv{}'.format(k + 1) for k in range(len(self.invariant_values))]
        lines = ['ply', 'format ascii 1.0', 'comment killingfoliator orbit sample']
        for name, (text, _) in zip(inv_names, self.invariant_values):
            lines.append('comment {} = {}'.format(name, text))
        lines.append('element vertex {}'.format(len(self)))
        lines.extend('property float {}'.format(name) for name in names + inv_names)
        lines.append('end_header')
        columns = [self.points[:, i] for i in range(self.dim)] + [np.asarray(v) for _, v in self.invariant_values]
        for row in zip(*columns):
            lines.append(' '.join(repr(float(v)) for v in row))
        with open(path, 'w') as f:
            f.write('\n'.join(lines) + '\n')

    def __repr__(self):
        return '<PointCloud {} points in R^{}>'.format(len(self), self.dim)


def _as_expression(inv, dim):
    return inv if isinstance(inv, Expression) else parse_expr(str(inv), dim)


def sample_orbit(D, p0, steps, t_scale=None, seed=0, invariants=None):
    """
    Random walk on the orbit through p0: each step flows a uniformly chosen member of the family for a time
    uniform in [-t_scale, t_scale].
    :type D: kf_lie.FieldFamily
    :param steps: number of steps, >= 1
    :param seed: seed of the numpy generator; equal seeds give equal clouds
    :param invariants: expressions (or texts) evaluated at every sampled point
    :return: PointCloud with steps + 1 points, p0 first
    """
    if steps < 1:
        raise ValueError('Orbit sampling needs at least one step, got {}'.format(steps))
    t_scale = config['ORBIT_T_SCALE'] if t_scale is None else t_scale
    p = np.asarray(p0, dtype=float)
    if p.shape != (D.dim,):
        raise DimensionMismatchError('Start point of shape {} for a family on R^{}'.format(p.shape, D.dim))
    rng = np.random.default_rng(seed)
    points = [p]
    for _ in range(steps):
        member = D.members[rng.integers(len(D))]
        p = flow_affine(member, p, rng.uniform(-t_scale, t_scale))
        points.append(p)
    points = np.array(points)
    invariant_values = []
    for inv in invariants or []:
        e = _as_expression(inv, D.dim)
        invariant_values.append((e.text, e.evaluate_many(points)))
    provenance = {'family': list(D.names), 'start': p0, 'steps': steps, 't_scale': t_scale, 'seed': seed}
    return PointCloud(points, provenance, invariant_values)


class ConservationReport(NamedTuple):
    passed: bool
    max_drift: float
    tol: float
    witness: Optional[Tuple[Tuple[float, ...], float]]
    lie_derivative: Expression
    lie_derivative_vanishes: bool
    lie_derivative_max: float

    @property
    def verdict(self):
        return 'pass' if self.passed else 'fail'


def conserved_check(f, inv, traj, tol=None, grid=None):
    """
    Check that `inv` is constant along a trajectory of `f`, and certify it analytically through the symbolic
    Lie derivative sum_i xi_i d inv / d x_i evaluated on a test grid.
    :param f: AffineField or ExprField
    :param inv: Expression or expression text
    :type traj: kf_flow.Trajectory
    :param tol: allowed drift from the value at p0, default config['CONSERVED_TOL']
    :return: ConservationReport; the witness is (worst point, its drift) when the check fails
    """
    tol = config['CONSERVED_TOL'] if tol is None else tol
    inv = _as_expression(inv, f.dim)
    if inv.dim != f.dim or traj.dim != f.dim:
        raise DimensionMismatchError('Field on R^{}, invariant on R^{}, trajectory in R^{}'.format(
            f.dim, inv.dim, traj.dim))
    values = inv.evaluate_many(traj.points)
    drift = np.abs(values - inv.evaluate(traj.p0))
    k = int(np.argmax(drift))
    max_drift = float(drift[k])
    passed = max_drift <= tol
    witness = None if passed else (tuple(traj.points[k].tolist()), max_drift)

    expr_field = f.to_expr_field() if isinstance(f, AffineField) else f
    lie = expr_field.lie_derivative(inv)
    grid = sampling_grid(f.dim) if grid is None else np.asarray(grid, dtype=float)
    lie_max = float(np.max(np.abs(lie.evaluate_many(grid))))
    return ConservationReport(passed, max_drift, tol, witness, lie, lie_max <= config['LIE_DERIVATIVE_TOL'],
                              lie_max)
