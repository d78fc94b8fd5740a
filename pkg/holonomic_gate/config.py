"""Configuration constants for the holonomic gate engine."""

import math
from pathlib import Path

# ── Basis ────────────────────────────────────────────────────
# Every 4x4 matrix in the package is written over this ordering.
BASIS_LABELS = ("+3/2", "-3/2", "+1/2", "-1/2")
M_VALUES = (1.5, -1.5, 0.5, -0.5)
DIM = 4

SPIN = 1.5
CASIMIR = SPIN * (SPIN + 1)          # 15/4
QUADRUPOLE_SHIFT = CASIMIR / 3       # 5/4

# Slots of the |m| = 3/2 and |m| = 1/2 pairs
BLOCK_32 = slice(0, 2)
BLOCK_12 = slice(2, 4)

# ── Parameter domain ─────────────────────────────────────────
THETA_MARGIN = 1e-6                  # theta <= pi/2 - margin
THETA_MAX = math.pi / 2 - THETA_MARGIN

# ── Default tolerances (see settings.Tolerances) ─────────────
INPUT_TOL = 1e-10                    # hermiticity / unitarity of inputs
OUTPUT_TOL = 1e-12                   # unitarity / reconstruction of outputs
ALGEBRA_TOL = 1e-14
DIAG_TOL = 1e-10
COMPOSITION_TOL = 1e-11
FIDELITY_TOL = 1e-6
NORM_DRIFT_TOL = 1e-8
CONTINUITY_TOL = 1e-4
ADIABATIC_OFF_BLOCK = 1e-2
NONADIABATIC_TRANSFER_FLOOR = 0.05
SLOPE_WINDOW = 0.5
WILSON_LOOP_TOL = 1e-4               # loop eigenvalues vs the adiabatic limit

# ── Diagonalization chain ────────────────────────────────────
XI_FLOOR_FACTOR = 1e-12              # |xi| below this * max(w0, w1) is uncoupled
K_ASYMPTOTIC = 1e8                   # |k| beyond this uses the series form of beta
EIG_TIE_TOL = 1e-10                  # relative gap treated as a degeneracy
PHASE_FLOOR = 1e-12                  # smallest component used to fix a phase

# ── Gate characterization ────────────────────────────────────
PARTICIPATION_THRESHOLD = 0.01

# ── Oracle integrator ────────────────────────────────────────
DEFAULT_STEP_SCALE = 0.01
MAX_STEP_SCALE = 0.1
DEFAULT_MAX_STEPS = 5_000_000
DEFAULT_CONVERGENCE_FACTOR = 10.0
DEFAULT_TARGET_TOLERANCE = 1e-6
OUTPUT_CHUNK = 8192                  # step propagators built per batch

# ── Adiabatic (Wilczek-Zee) numerics ─────────────────────────
DEFAULT_LOOP_POINTS = 4096
DEFAULT_FD_STEP = 1e-5

# ── CLI / sweep ──────────────────────────────────────────────
SCHEMA_VERSION = 1
GRID_CAP = 10**6
PIPE_WIDTH = 200                     # console columns when output is not a terminal
DEFAULT_SEED = 7
DEFAULT_CONCURRENCY = 4
SWEEP_AXES = ("omega0", "omega1", "theta", "t")

# ── Oracle cache ─────────────────────────────────────────────
CACHE_DIR = Path.home() / ".hgate" / "cache"
TTL_ORACLE = 30 * 86400              # integrations never go stale; bound disk use
