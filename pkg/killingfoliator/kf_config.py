"""
Config global options
Options can be changed at run time. See tests/test_fields.py for usage example

Options:
KILLING_TOL: tolerance of the symbolic-grid Killing check. Residuals are evaluated, not approximated, so this
        only absorbs round-off.
        Default: 1e-9
AFFINE_TOL: an ExprField whose second derivatives stay below this on the test grid is treated as affine.
        Default: 1e-12
GRID_POINTS, GRID_HALF_WIDTH, GRID_MAX_DIM: default sampling lattice, GRID_POINTS per axis on
        [-GRID_HALF_WIDTH, GRID_HALF_WIDTH]^n. No default lattice is built above GRID_MAX_DIM.
RANK_TOL: singular values at or below RANK_TOL * (largest singular value) count as zero.
        Default: 1e-9
EXPM_SCALE_NORM, EXPM_TAYLOR_TERMS: the matrix exponential scales its argument to 1-norm <= EXPM_SCALE_NORM and
        sums EXPM_TAYLOR_TERMS terms of the series before squaring back.
NUMERIC_STEP: default step of the fixed-step Runge-Kutta integrator.
ISOMETRY_TOL: allowed distance distortion of the isometry spot check.
CONSERVED_TOL, LIE_DERIVATIVE_TOL: allowed drift of a conserved quantity along a trajectory, and the threshold
        under which its symbolic Lie derivative counts as identically zero on the test grid.
ORBIT_T_SCALE: flow times of the orbit random walk are drawn from [-ORBIT_T_SCALE, ORBIT_T_SCALE].
GENERIC_SAMPLES, GENERIC_RADIUS, CLASSIFY_SEED: generic rank sampling of the classifier.
FIXED_SET_TOL: fixed set residual threshold, scaled by (1 + largest coefficient).
TANGENCY_TOL, ORTHOGONALITY_TOL: default tolerances of the verification checks.
LOG_DIR: directory of the run log. None disables the run log.
        Default: ./logs
SHOW_PROGRESS: show tqdm progress bars for grids and scenario suites.
"""
from importlib.metadata import version, PackageNotFoundError

try:
    __version__ = version("killingfoliator")
except PackageNotFoundError:
    __version__ = ""

config = {
    'KILLING_TOL': 1e-9,
    'AFFINE_TOL': 1e-12,
    'GRID_POINTS': 5,
    'GRID_HALF_WIDTH': 2.0,
    'GRID_MAX_DIM': 4,
    'RANK_TOL': 1e-9,
    'EXPM_SCALE_NORM': 0.5,
    'EXPM_TAYLOR_TERMS': 18,
    'NUMERIC_STEP': 1e-3,
    'ISOMETRY_TOL': 1e-10,
    'CONSERVED_TOL': 1e-9,
    'LIE_DERIVATIVE_TOL': 1e-9,
    'ORBIT_T_SCALE': 0.5,
    'GENERIC_SAMPLES': 64,
    'GENERIC_RADIUS': 3.0,
    'CLASSIFY_SEED': 0,
    'FIXED_SET_TOL': 1e-9,
    'TANGENCY_TOL': 1e-9,
    'ORTHOGONALITY_TOL': 1e-9,
    'LOG_DIR': './logs',
    'LOG_NAME': None,
    'SHOW_PROGRESS': False,
}
