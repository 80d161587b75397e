import math
from typing import NamedTuple, List, Tuple

import numpy as np
import pandas as pd

from killingfoliator.kf_config import config
from killingfoliator.kf_core import DimensionMismatchError
from killingfoliator.kf_fields import AffineField, as_affine

"""
Flows of vector fields.

An affine field x' = A.x + b is integrated exactly through the augmented generator M = [[A, b], [0, 0]]:
(x(t), 1) = exp(t M) (x0, 1). Other fields use a fixed-step classical Runge-Kutta scheme.
"""

__license__ = 'MIT'


def expm(M, scale_norm=None, terms=None):
    """
    Matrix exponential by scaling and squaring: scale M by 2^-k until its 1-norm is at most `scale_norm`, sum the
    Taylor series up to the term of order `terms`, then square k times.
    Sized for the small (n + 1) x (n + 1) generators used here.
    """
    scale_norm = config['EXPM_SCALE_NORM'] if scale_norm is None else scale_norm
    terms = config['EXPM_TAYLOR_TERMS'] if terms is None else terms
    M = np.asarray(M, dtype=float)
    norm = np.linalg.norm(M, 1)
    k = 0
    if norm > scale_norm:
        k = int(math.ceil(math.log2(norm / scale_norm)))
    X = M / 2.0 ** k
    result = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for j in range(1, terms + 1):
        term = term @ X / j
        result = result + term
    for _ in range(k):
        result = result @ result
    return result


def augmented_generator(f):
    n = f.dim
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = f.A
    M[:n, n] = f.b
    return M


def _check_point(f, p):
    p = np.asarray(p, dtype=float)
    if p.shape != (f.dim,):
        raise DimensionMismatchError('Point of shape {} given to a field on R^{}'.format(p.shape, f.dim))
    return p


def flow_affine(f, p0, t):
    """
    Exact time-t flow of an affine field.
    :type f: AffineField
    :param p0: start point
    :param t: time
    :return: point, array of shape (n,)
    """
    p0 = _check_point(f, p0)
    E = expm(t * augmented_generator(f))
    return E[:-1, :-1] @ p0 + E[:-1, -1]


def flow_numeric(f, p0, t, step=None):
    """
    Fixed-step 4th order Runge-Kutta over ceil(|t| / step) equal steps.
    :param f: AffineField or ExprField
    :param step: positive step bound, default config['NUMERIC_STEP']
    :return: point
    """
    step = config['NUMERIC_STEP'] if step is None else step
    if step <= 0:
        raise ValueError('Step must be positive, got {}'.format(step))
    x = _check_point(f, p0).copy()
    steps = int(math.ceil(abs(t) / step))
    if steps == 0:
        return x
    h = t / steps
    for _ in range(steps):
        k1 = f.evaluate(x)
        k2 = f.evaluate(x + 0.5 * h * k1)
        k3 = f.evaluate(x + 0.5 * h * k2)
        k4 = f.evaluate(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


class Trajectory(object):
    """
    Uniformly sampled integral curve. points[k] is the flow of p0 over times[k] - times[0], so points[0] = p0.
    """

    def __init__(self, field, p0, times, points, integrator):
        self.field = field
        self.p0 = np.asarray(p0, dtype=float)
        self.times = np.asarray(times, dtype=float)
        self.points = np.asarray(points, dtype=float)
        self.integrator = integrator
        self.times.setflags(write=False)
        self.points.setflags(write=False)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.times)

    def to_frame(self):
        frame = pd.DataFrame(self.points, columns=['x{}'.format(i + 1) for i in range(self.dim)])
        frame.insert(0, 't', self.times)
        return frame

    def to_csv(self, path=None):
        """
        Header t,x1,...,xn and one row per sample, floats in shortest round-trip form.
        :param path: output file; if None the CSV text is returned
        """
        return self.to_frame().to_csv(path, index=False)

    def __repr__(self):
        return '<Trajectory {} samples on [{}, {}] {}>'.format(len(self), self.times[0], self.times[-1],
                                                               self.integrator)


def trajectory(f, p0, t_min, t_max, samples, step=None):
    """
    Sample the integral curve through p0 at `samples` uniform times on [t_min, t_max]; p0 is the state at t_min.
    Affine fields, including expression fields that as_affine recognises, are flowed exactly; other fields with
    flow_numeric between consecutive samples.
    :return: Trajectory
    """
    if samples < 2:
        raise ValueError('A trajectory needs at least 2 samples, got {}'.format(samples))
    if t_min > t_max:
        raise ValueError('t_min {} is larger than t_max {}'.format(t_min, t_max))
    p0 = _check_point(f, p0)
    times = np.linspace(t_min, t_max, samples)
    points = [p0]
    # expression fields above the default grid dimension are not checked for affinity
    g = as_affine(f) if isinstance(f, AffineField) or f.dim <= config['GRID_MAX_DIM'] else None
    if g is not None:
        for t in times[1:]:
            points.append(flow_affine(g, p0, t - t_min))
        integrator = 'exact'
    else:
        step = config['NUMERIC_STEP'] if step is None else step
        for t_prev, t in zip(times[:-1], times[1:]):
            points.append(flow_numeric(f, points[-1], t - t_prev, step))
        integrator = 'rk4(step={})'.format(step)
    return Trajectory(f, p0, times, points, integrator)


class IsometryWitness(NamedTuple):
    p: Tuple[float, ...]
    q: Tuple[float, ...]
    t: float
    deviation: float


class IsometryReport(NamedTuple):
    passed: bool
    max_deviation: float
    tol: float
    witnesses: List[IsometryWitness]

    @property
    def verdict(self):
        return 'pass' if self.passed else 'fail'


def isometry_spotcheck(f, pairs, times, tol=None):
    """
    Compare | |Phi_t(p) - Phi_t(q)| - |p - q| | against tol for every pair and time.
    :type f: AffineField
    :param pairs: iterable of (p, q) point pairs
    :param times: iterable of flow times
    :param tol: default config['ISOMETRY_TOL']
    :return: IsometryReport; witnesses are the (pair, time) combinations above tol
    """
    tol = config['ISOMETRY_TOL'] if tol is None else tol
    witnesses = []
    max_deviation = 0.0
    for p, q in pairs:
        p = _check_point(f, p)
        q = _check_point(f, q)
        d0 = np.linalg.norm(p - q)
        for t in times:
            deviation = abs(np.linalg.norm(flow_affine(f, p, t) - flow_affine(f, q, t)) - d0)
            max_deviation = max(max_deviation, deviation)
            if deviation > tol:
                witnesses.append(IsometryWitness(tuple(p.tolist()), tuple(q.tolist()), float(t), float(deviation)))
    return IsometryReport(not witnesses, float(max_deviation), tol, witnesses)
