"""Fixed-step RK4 integration of the lab-frame Schrodinger equation.

The propagator U' = -i H(t) U is integrated on all four columns at once.
Because the equation is linear, each RK4 step is a 4x4 matrix M_k applied on
the left; steps are built in vectorized batches and multiplied as a balanced
tree. Nothing is renormalized: column-norm drift is measured and reported.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import (
    DEFAULT_CONVERGENCE_FACTOR,
    DEFAULT_MAX_STEPS,
    DEFAULT_STEP_SCALE,
    DEFAULT_TARGET_TOLERANCE,
    MAX_STEP_SCALE,
    NORM_DRIFT_TOL,
    OUTPUT_CHUNK,
)
from .errors import ConfigError, DomainError, NoConvergence, NormDriftExceeded, StepBudgetExceeded
from .holonomy import lab_propagator
from .linalg import ComplexMat4, frobenius_norm, identity, trace_fidelity
from .spin import ModelParams, SpinOps, build_spin_ops, h_lab_series

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntegratorConfig:
    """Step rule h * (omega0 + 3 omega1) <= step_scale, plus acceptance limits."""

    step_scale: float = DEFAULT_STEP_SCALE
    max_steps: int = DEFAULT_MAX_STEPS
    convergence_factor: float = DEFAULT_CONVERGENCE_FACTOR
    target_tolerance: float = DEFAULT_TARGET_TOLERANCE
    norm_drift_limit: float = NORM_DRIFT_TOL

    def __post_init__(self):
        if not 0 < self.step_scale <= MAX_STEP_SCALE:
            raise ConfigError(f"step_scale must lie in (0, {MAX_STEP_SCALE}] (got {self.step_scale})")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1 (got {self.max_steps})")

    def to_dict(self) -> dict:
        return {
            "step_scale": self.step_scale,
            "max_steps": self.max_steps,
            "convergence_factor": self.convergence_factor,
            "target_tolerance": self.target_tolerance,
            "norm_drift_limit": self.norm_drift_limit,
        }


@dataclass(frozen=True, eq=False)
class PropagationResult:
    u_numeric: ComplexMat4
    norm_drift: float
    steps_taken: int
    convergence_delta: float = 0.0

    def fidelity_vs(self, u_other: ComplexMat4) -> float:
        """|tr(u_other^dagger u_numeric)| / 4."""
        return trace_fidelity(u_other, self.u_numeric)

    def to_dict(self) -> dict:
        return {
            "u_numeric": [[[z.real, z.imag] for z in row] for row in self.u_numeric.tolist()],
            "norm_drift": self.norm_drift,
            "steps_taken": self.steps_taken,
            "convergence_delta": self.convergence_delta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PropagationResult:
        u = np.array([[complex(re, im) for re, im in row] for row in data["u_numeric"]])
        return cls(
            u_numeric=u,
            norm_drift=float(data["norm_drift"]),
            steps_taken=int(data["steps_taken"]),
            convergence_delta=float(data.get("convergence_delta", 0.0)),
        )


def frequency_bound(p: ModelParams) -> float:
    """Upper bound on the rates in H(t): the spectrum plus the co-rotating phase spread."""
    return p.omega0 + 3 * p.omega1


def step_count(p: ModelParams, t: float, step_scale: float) -> int:
    return max(1, math.ceil(t * frequency_bound(p) / step_scale))


def _tree_product(ms: np.ndarray) -> ComplexMat4:
    """M_{n-1} ... M_1 M_0 for a time-ordered stack of step matrices."""
    while len(ms) > 1:
        if len(ms) % 2:
            ms = np.concatenate([ms, identity()[None]])
        ms = ms[1::2] @ ms[0::2]
    return ms[0]


def _rk4_steps(starts: np.ndarray, h: float, p: ModelParams, ops: SpinOps) -> np.ndarray:
    """One RK4 step matrix per start time."""
    a1 = -1j * h_lab_series(starts, p, ops)
    a2 = -1j * h_lab_series(starts + h / 2, p, ops)
    a4 = -1j * h_lab_series(starts + h, p, ops)
    eye = identity()[None]
    k1 = a1
    k2 = a2 @ (eye + h / 2 * k1)
    k3 = a2 @ (eye + h / 2 * k2)
    k4 = a4 @ (eye + h * k3)
    return eye + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def propagate_fixed(
    p: ModelParams, t: float, n: int, ops: SpinOps | None = None, chunk: int = OUTPUT_CHUNK
) -> ComplexMat4:
    """Propagator over [0, t] from ``n`` equal RK4 steps."""
    ops = ops or build_spin_ops()
    h = t / n
    u = identity()
    for first in range(0, n, chunk):
        idx = np.arange(first, min(first + chunk, n))
        u = _tree_product(_rk4_steps(idx * h, h, p, ops)) @ u
    return u


def _norm_drift(u: ComplexMat4) -> float:
    return float(np.max(np.abs(np.linalg.norm(u, axis=0) - 1)))


def integrate_lab(
    p: ModelParams,
    t: float,
    cfg: IntegratorConfig | None = None,
    ops: SpinOps | None = None,
) -> PropagationResult:
    """Time-ordered lab propagator with one step-halved verification pass.

    Raises StepBudgetExceeded before integrating when the halved run would
    exceed ``cfg.max_steps``, NoConvergence when the two runs disagree by
    more than convergence_factor * target_tolerance, and NormDriftExceeded
    when a column norm of the returned propagator drifts past the limit.
    """
    cfg = cfg or IntegratorConfig()
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be finite and >= 0 (got {t})")
    p.require_field()
    if t == 0:
        return PropagationResult(u_numeric=identity(), norm_drift=0.0, steps_taken=0)

    ops = ops or build_spin_ops()
    n = step_count(p, t, cfg.step_scale)
    if 2 * n > cfg.max_steps:
        raise StepBudgetExceeded(f"{2 * n} steps needed, budget is {cfg.max_steps}")

    coarse = propagate_fixed(p, t, n, ops)
    fine = propagate_fixed(p, t, 2 * n, ops)
    delta = frobenius_norm(fine - coarse)
    limit = cfg.convergence_factor * cfg.target_tolerance
    if delta > limit:
        raise NoConvergence(f"step-halved run differs by {delta:.3e} (limit {limit:.1e})")

    drift = _norm_drift(fine)
    if drift > cfg.norm_drift_limit:
        raise NormDriftExceeded(f"column norm drift {drift:.3e} exceeds {cfg.norm_drift_limit:.1e}")

    log.debug("integrated t=%g with %d steps: delta %.2e, drift %.2e", t, 2 * n, delta, drift)
    return PropagationResult(u_numeric=fine, norm_drift=drift, steps_taken=2 * n, convergence_delta=delta)


def rotating_frame_check(
    p: ModelParams, t: float, cfg: IntegratorConfig | None = None, ops: SpinOps | None = None
) -> float:
    """Fidelity between the integrated propagator and U1(t) V exp(-i h_rot t) V^dagger."""
    ops = ops or build_spin_ops()
    return integrate_lab(p, t, cfg, ops).fidelity_vs(lab_propagator(p, t, ops))


def convergence_order(
    p: ModelParams,
    t: float,
    scales: tuple[float, ...] = (0.02, 0.01, 0.005),
    ops: SpinOps | None = None,
) -> tuple[float, list[float]]:
    """Log-log slope of the Frobenius error against the closed form versus step size."""
    ops = ops or build_spin_ops()
    exact = lab_propagator(p, t, ops)
    steps, errors = [], []
    for scale in scales:
        n = step_count(p, t, scale)
        steps.append(t / n)
        errors.append(frobenius_norm(propagate_fixed(p, t, n, ops) - exact))
    slope = float(np.polyfit(np.log(steps), np.log(errors), 1)[0])
    log.debug("convergence order %.3f from errors %s", slope, errors)
    return slope, errors
