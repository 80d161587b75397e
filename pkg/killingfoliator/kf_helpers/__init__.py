import math

import numpy as np

from killingfoliator.kf_core import format_msg
from killingfoliator.kf_fields import AffineField
from killingfoliator.kf_flow import expm

"""
Named Killing fields, families and closed-form integral curves used by the scenario suite, the docs and the tests.

R^3 coordinates are (x, y, z), R^4 coordinates (x, y, z, w).
"""

__license__ = 'MIT'

__all__ = ['format_msg', 'BASIS_R3', 'X1', 'X2', 'X3', 'X4', 'X5', 'X6', 'CYLINDER_X1', 'CYLINDER_X2',
           'HOPF', 'TORUS_X', 'TORUS_Y', 'S2XR_ROTATION', 'FAMILIES', 'EXPECTED_TYPES', 'SPHERE_INVARIANT',
           'TORUS_INVARIANT', 'screw_field', 'screw_curve', 'hopf_curve', 'torus_y_curve', 's2xr_curve',
           'random_rigid_motion']


def _affine(rows, b=None):
    A = np.array(rows, dtype=float)
    return AffineField(A, np.zeros(A.shape[0]) if b is None else b)


# translations
X1 = AffineField(np.zeros((3, 3)), [1.0, 0.0, 0.0])
X2 = AffineField(np.zeros((3, 3)), [0.0, 1.0, 0.0])
X3 = AffineField(np.zeros((3, 3)), [0.0, 0.0, 1.0])
# rotations; [X4, X5] = X6
X4 = _affine([[0, 0, 0], [0, 0, 1], [0, -1, 0]])  # z d/dy - y d/dz
X5 = _affine([[0, 0, -1], [0, 0, 0], [1, 0, 0]])  # x d/dz - z d/dx
X6 = _affine([[0, 1, 0], [-1, 0, 0], [0, 0, 0]])  # y d/dx - x d/dy

BASIS_R3 = (X1, X2, X3, X4, X5, X6)

# the two Killing fields tangent to the cylinder x^2 + y^2 = 1
CYLINDER_X1 = X6
CYLINDER_X2 = X3

# R^4 = C^2 with z1 = x + iy, z2 = z + iw. HOPF multiplies both by i; TORUS_X and TORUS_Y commute and are
# tangent to S^3, their orbits on S^3 are tori and two circles.
HOPF = _affine([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
TORUS_X = HOPF
TORUS_Y = _affine([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])

# rotation of the (x, y) factor of R^4, tangent to S^2 x R = {x^2 + y^2 + z^2 = 1}
S2XR_ROTATION = _affine([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])

SPHERE_INVARIANT = 'x^2 + y^2 + z^2 + w^2'
TORUS_INVARIANT = 'y*z - x*w'

FAMILIES = {
    'lines': ((X3,), ('X3',)),
    'circles': ((X6,), ('X6',)),
    'helix': ((X6 + 2.0 * X3,), ('X6+2X3',)),
    'planes': ((X1, X2), ('X1', 'X2')),
    'spheres': ((X4, X5, X6), ('X4', 'X5', 'X6')),
    'cylinders': ((X6, X3), ('X6', 'X3')),
    'whole_space': (BASIS_R3, ('X1', 'X2', 'X3', 'X4', 'X5', 'X6')),
}

EXPECTED_TYPES = {
    'lines': {'type': 'ParallelLines', 'direction': [0.0, 0.0, 1.0]},
    'circles': {'type': 'ConcentricCircles', 'axis_point': [0.0, 0.0, 0.0], 'axis_dir': [0.0, 0.0, 1.0]},
    'helix': {'type': 'Helices', 'axis_point': [0.0, 0.0, 0.0], 'axis_dir': [0.0, 0.0, 1.0], 'pitch': 2.0},
    'planes': {'type': 'ParallelPlanes', 'normal': [0.0, 0.0, 1.0]},
    'spheres': {'type': 'ConcentricSpheres', 'center': [0.0, 0.0, 0.0]},
    'cylinders': {'type': 'ConcentricCylinders', 'axis_point': [0.0, 0.0, 0.0], 'axis_dir': [0.0, 0.0, 1.0]},
    'whole_space': {'type': 'WholeSpace'},
}


def screw_field(l1, l2):
    """l1 * CYLINDER_X1 + l2 * CYLINDER_X2"""
    return l1 * CYLINDER_X1 + l2 * CYLINDER_X2


def screw_curve(l1, l2, t, u0=math.pi / 2, v0=0.0):
    """
    Integral curve of screw_field(l1, l2) through the cylinder point (sin u0, cos u0, v0):
    x = sin(u0 + l1 t), y = cos(u0 + l1 t), z = v0 + l2 t
    """
    u = u0 + l1 * t
    return np.array([math.sin(u), math.cos(u), v0 + l2 * t])


def hopf_curve(p, t):
    """(z1 e^{it}, z2 e^{it}) for p = (x, y, z, w)"""
    z1 = complex(p[0], p[1]) * complex(math.cos(t), math.sin(t))
    z2 = complex(p[2], p[3]) * complex(math.cos(t), math.sin(t))
    return np.array([z1.real, z1.imag, z2.real, z2.imag])


def torus_y_curve(p, t):
    x, y, z, w = p
    c, s = math.cos(t), math.sin(t)
    return np.array([x * c + z * s, y * c + w * s, z * c - x * s, w * c - y * s])


def s2xr_curve(p, t):
    x, y, z, w = p
    c, s = math.cos(t), math.sin(t)
    return np.array([x * c + y * s, y * c - x * s, z, w])


def random_rigid_motion(rng, dim=3, spread=2.0):
    """
    A random proper rigid motion p -> R.p + t: R = exp(K) for a random skew K, t uniform in [-spread, spread]^dim.
    :type rng: numpy.random.Generator
    :return: (R, t)
    """
    K = np.zeros((dim, dim))
    K[np.tril_indices(dim, -1)] = rng.uniform(-math.pi, math.pi, dim * (dim - 1) // 2)
    K -= K.T
    U, _, Vt = np.linalg.svd(expm(K))
    return U @ Vt, rng.uniform(-spread, spread, dim)
