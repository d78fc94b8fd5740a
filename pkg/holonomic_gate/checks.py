"""Verification suite behind ``hgate verify``.

Each check evaluates one invariant over a fixed or seeded set of parameter
points and reports its worst value against a bound. Output carries no
timing, so a fixed seed gives identical reports.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .adiabatic import compare_adiabatic
from .config import DEFAULT_SEED, M_VALUES
from .diagonalize import alpha_of_theta, condition_residual, diagonalize, relative_off_diagonal
from .holonomy import characterize_gate, connection_derived, gate, gate_composed, per_period_transfer
from .linalg import (
    commutator,
    expm_i_hermitian,
    frobenius_norm,
    hermitian_eig,
    hermiticity_residual,
    off_diagonal_norm,
    unitarity_residual,
)
from .oracle import IntegratorConfig, convergence_order, integrate_lab, rotating_frame_check
from .settings import DEFAULT_TOLERANCES, Tolerances
from .spin import ModelParams, SpinOps, build_spin_ops, h0, h_lab, h_rot, lab_rotation

log = logging.getLogger(__name__)

UPPER = "<="
LOWER = ">="
STRICTLY_POSITIVE = math.ulp(0.0)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named invariant check."""

    name: str
    module: str
    worst: float
    bound: float
    direction: str = UPPER
    detail: str = ""

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.worst):
            return False
        return self.worst <= self.bound if self.direction == UPPER else self.worst >= self.bound

    def to_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


# ── Parameter sets ───────────────────────────────────────────


def random_params(rng: np.random.Generator, n: int = 200) -> list[ModelParams]:
    """omega0 in [0.1, 10], omega1 in [0, 10], theta in [0, 1.4]."""
    return [
        ModelParams(float(rng.uniform(0.1, 10)), float(rng.uniform(0, 10)), float(rng.uniform(0, 1.4)))
        for _ in range(n)
    ]


def oracle_grid() -> list[tuple[ModelParams, float]]:
    """omega0 = 1; omega1 in {0.1, 1, 10}; theta in {pi/6, pi/4, pi/3}; 1, 5 and 10 periods."""
    grid = []
    for omega1 in (0.1, 1.0, 10.0):
        for theta in (math.pi / 6, math.pi / 4, math.pi / 3):
            for periods in (1, 5, 10):
                grid.append((ModelParams(1.0, omega1, theta), periods * 2 * math.pi / omega1))
    return grid


COMPOSITION_POINTS = (
    (ModelParams(1.0, 0.5, math.pi / 6), 4 * math.pi),
    (ModelParams(1.0, 1.0, math.pi / 4), 2 * math.pi),
    (ModelParams(2.0, 0.3, 1.0), 7.5),
    (ModelParams(0.5, 3.0, 0.2), 3.0),
    (ModelParams(1.0, 10.0, math.pi / 3), 1.0),
)


# ── Checks per module ────────────────────────────────────────


def _linalg_checks(rng, tol: Tolerances) -> list[CheckResult]:
    recon, unit, group = 0.0, 0.0, 0.0
    for _ in range(1000):
        z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = (z + z.conj().T) / 2
        vals, vecs = hermitian_eig(h)
        recon = max(recon, frobenius_norm(vecs @ np.diag(vals) @ vecs.conj().T - h) / frobenius_norm(h))
        unit = max(unit, unitarity_residual(expm_i_hermitian(h, float(rng.uniform(0, 10)))))
        s, t = (float(x) for x in rng.uniform(0, 5, size=2))
        group = max(group, frobenius_norm(
            expm_i_hermitian(h, s + t) - expm_i_hermitian(h, s) @ expm_i_hermitian(h, t)
        ))
    return [
        CheckResult("eig-reconstruction", "core-linalg", recon, tol.output_check),
        CheckResult("expm-unitarity", "core-linalg", unit, tol.output_check),
        CheckResult("expm-group-law", "core-linalg", group, tol.output_check,
                    detail="exp(-ih(s+t)) = exp(-ihs) exp(-iht), 1000 draws"),
    ]


def _spin_checks(ops: SpinOps, rng, tol: Tolerances) -> list[CheckResult]:
    j = (ops.j1, ops.j2, ops.j3)
    comm = max(frobenius_norm(commutator(j[i], j[(i + 1) % 3]) - 1j * j[(i + 2) % 3]) for i in range(3))
    casimir = frobenius_norm(sum(m @ m for m in j) - 3.75 * np.eye(4))
    j3_exact = frobenius_norm(ops.j3 - np.diag(M_VALUES))

    rotation, spectrum, period = 0.0, 0.0, 0.0
    for _ in range(100):
        p = ModelParams(float(rng.uniform(0.1, 10)), float(rng.uniform(0, 10)), float(rng.uniform(0, 1.4)))
        t = float(rng.uniform(0, 20))
        r = lab_rotation(t, p, ops)
        h = h_lab(t, p, ops)
        rotation = max(rotation, frobenius_norm(r @ h0(p, ops) @ r.conj().T - h) / p.omega0)
        vals, _ = hermitian_eig(h)
        spectrum = max(spectrum, float(np.max(np.abs(vals - p.omega0 * np.array([-1, -1, 1, 1])))) / p.omega0)
        drive = ModelParams(p.omega0, max(p.omega1, 0.1), p.theta)
        cycle = 2 * math.pi / drive.omega1
        t0 = math.fmod(t, cycle)
        period = max(period, frobenius_norm(h_lab(t0 + cycle, drive, ops) - h_lab(t0, drive, ops)) / p.omega0)

    closed = 0.0
    for p in random_params(rng, 50):
        tilted = math.cos(p.theta) * ops.j3 - math.sin(p.theta) * ops.j1
        closed = max(closed, frobenius_norm(h_rot(p, ops) - (h0(p, ops) - p.omega1 * tilted)))

    return [
        CheckResult("su2-commutators", "spin-model", comm, tol.algebra),
        CheckResult("casimir", "spin-model", casimir, tol.algebra),
        CheckResult("j3-diagonal", "spin-model", j3_exact, tol.algebra),
        CheckResult("lab-rotation", "spin-model", rotation, tol.output_check),
        CheckResult("lab-isospectral", "spin-model", spectrum, tol.output_check),
        CheckResult("lab-periodicity", "spin-model", period, tol.output_check,
                    detail="H(t + 2 pi / omega1) = H(t)"),
        CheckResult("rotating-closed-form", "spin-model", closed, tol.output_check),
    ]


def _diag_checks(points: list[ModelParams], ops: SpinOps, tol: Tolerances) -> list[CheckResult]:
    off, unitary, cond, ratio, spectrum = 0.0, 0.0, 0.0, 0.0, 0.0
    tangent, root, w_unitary, det_u3 = 0.0, 0.0, 0.0, 0.0
    for p in points:
        chain = diagonalize(p, ops)
        two_tan = 2 * math.tan(p.theta)
        tangent = max(tangent, abs(math.tan(chain.alpha) - two_tan) / max(1.0, two_tan))
        w_unitary = max(w_unitary, unitarity_residual(chain.w))
        det_u3 = max(det_u3, abs(np.linalg.det(chain.u3) - 1))
        h = h_rot(p, ops)
        off = max(off, relative_off_diagonal(chain.w, h))
        for b1, b2 in zip(chain.beta1, chain.beta2):
            unitary = max(unitary, abs(b1 * b1 + b2 * b2 - 1))
        scale = max([abs(chain.xi)] + [abs(a - b) for a, b in zip(chain.lambda1, chain.lambda2)])
        cond = max(cond, max(abs(r) for r in condition_residual(chain)) / scale)
        if chain.coupled:
            for b1, b2, mu in zip(chain.beta1, chain.beta2, chain.mu):
                ratio = max(ratio, abs(b2 - mu * b1))
            for k, mu in zip(chain.k, chain.mu):
                root = max(root, abs(mu - (k + math.sqrt(1 + k * k))) / max(1.0, abs(k)))
        vals, _ = hermitian_eig(h)
        spectrum = max(spectrum, float(np.max(np.abs(np.sort(chain.energies) - vals))) / frobenius_norm(h))

    thetas = np.linspace(0, 1.4, 1000)
    monotone = min(b - a for a, b in zip(map(alpha_of_theta, thetas[:-1]), map(alpha_of_theta, thetas[1:])))

    near = ModelParams(1.0, 0.4, 1e-6)
    at_zero = ModelParams(1.0, 0.4, 0.0)
    c_near, c_zero = diagonalize(near, ops), diagonalize(at_zero, ops)
    continuity = max(
        frobenius_norm(c_near.w - c_zero.w),
        frobenius_norm(c_near.h_d - c_zero.h_d),
        frobenius_norm(connection_derived(c_near, ops).a_full - connection_derived(c_zero, ops).a_full),
    )

    return [
        CheckResult("diagonalization-residual", "diag-chain", off, tol.diagonalization),
        CheckResult("beta-unitarity", "diag-chain", unitary, tol.output_check),
        CheckResult("beta-condition", "diag-chain", cond, tol.diagonalization),
        CheckResult("beta-mu-ratio", "diag-chain", ratio, tol.output_check),
        CheckResult("mu-root", "diag-chain", root, tol.output_check, detail="mu = k + sqrt(1 + k^2)"),
        CheckResult("tan-alpha", "diag-chain", tangent, tol.output_check, detail="tan(alpha) = 2 tan(theta)"),
        CheckResult("w-unitarity", "diag-chain", w_unitary, tol.output_check),
        CheckResult("u3-determinant", "diag-chain", det_u3, tol.output_check, detail="det(u3) = +1"),
        CheckResult("h_d-spectrum", "diag-chain", spectrum, tol.diagonalization),
        CheckResult("alpha-increasing", "diag-chain", monotone, STRICTLY_POSITIVE, LOWER,
                    "smallest step of alpha(theta), must be > 0"),
        CheckResult("theta-continuity", "diag-chain", continuity, tol.continuity),
    ]


def _connection_checks(points: list[ModelParams], ops: SpinOps, tol: Tolerances) -> list[CheckResult]:
    herm, trace, spectrum = 0.0, 0.0, 0.0
    for p in points:
        a = connection_derived(diagonalize(p, ops), ops).a_full
        herm = max(herm, hermiticity_residual(a))
        trace = max(trace, abs(np.trace(a)))
        spectrum = max(spectrum, float(np.max(np.abs(np.linalg.eigvalsh(a) - np.sort(M_VALUES)))))

    flat = ModelParams(1.0, 0.7, 0.0)
    exact = frobenius_norm(connection_derived(diagonalize(flat, ops), ops).a_full - ops.j3)

    return [
        CheckResult("connection-hermitian", "holonomy", herm, tol.output_check),
        CheckResult("connection-traceless", "holonomy", trace, tol.diagonalization),
        CheckResult("connection-spectrum", "holonomy", spectrum, tol.diagonalization),
        CheckResult("connection-theta0", "holonomy", exact, tol.algebra, detail="A = J3 at theta = 0"),
    ]


def _gate_checks(ops: SpinOps, tol: Tolerances) -> list[CheckResult]:
    unitary, factor, group, compose = 0.0, 0.0, 0.0, 0.0
    for p, t in COMPOSITION_POINTS:
        g = gate(p, t, ops)
        unitary = max(unitary, *(unitarity_residual(u) for u in (g.u_gate, g.u_geometric, g.u_dynamic)))
        factor = max(factor, frobenius_norm(g.u_gate - g.factorized()))
        a = g.connection.a_full
        split = expm_i_hermitian(a, p.omega1 * t / 3) @ expm_i_hermitian(a, 2 * p.omega1 * t / 3)
        group = max(group, frobenius_norm(split - g.u_geometric))
        for n in (2, 10, 100):
            compose = max(compose, frobenius_norm(gate_composed(p, t, n, ops) - g.u_gate))

    flat = max(off_diagonal_norm(gate(ModelParams(1.0, 0.8, 0.0), t, ops).u_gate) for t in (0.5, 3.0, 40.0))

    mixing = characterize_gate(gate(ModelParams(1.0, 1.0, math.pi / 4), 2 * math.pi, ops))
    slow = per_period_transfer(ModelParams(1.0, 1e-3, math.pi / 4), ops)
    fast = per_period_transfer(ModelParams(1.0, 1.0, math.pi / 4), ops)

    return [
        CheckResult("gate-unitarity", "holonomy", unitary, tol.output_check),
        CheckResult("gate-factorization", "holonomy", factor, tol.composition),
        CheckResult("geometric-group-law", "holonomy", group, tol.composition),
        CheckResult("no-time-ordering", "holonomy", compose, tol.composition, detail="n = 2, 10, 100"),
        CheckResult("theta0-diagonal-gate", "holonomy", flat, tol.output_check),
        CheckResult("gate-mixing", "holonomy", float(mixing.max_participation), 2.0, LOWER,
                    "largest column participation"),
        CheckResult("adiabatic-transfer", "holonomy", slow, tol.adiabatic_off_block,
                    detail="omega1/omega0 = 1e-3"),
        CheckResult("nonadiabatic-transfer", "holonomy", fast, tol.transfer_floor, LOWER,
                    "omega1/omega0 = 1"),
    ]


def _adiabatic_checks(ops: SpinOps, tol: Tolerances) -> list[CheckResult]:
    p = ModelParams(1.0, 1e-3, math.pi / 4)
    report = compare_adiabatic(p, ops)
    wz = max(report.wz_offdiag["3/2"], abs(report.wz_offdiag["1/2"] - math.sin(p.theta)))
    return [
        CheckResult("wz-offdiagonal", "holonomy", wz, tol.continuity,
                    detail="|A32 off-diag| = 0, |A12 off-diag| = sin(theta)"),
        CheckResult("wilson-loop", "holonomy", max(report.loop_error.values()), tol.wilson_loop),
        CheckResult("adiabatic-limit", "holonomy", max(report.derived_gap.values()), tol.adiabatic_off_block,
                    detail="derived block spectra at omega1/omega0 = 1e-3"),
    ]


def _oracle_checks(rng, ops: SpinOps, tol: Tolerances, cfg: IntegratorConfig) -> list[CheckResult]:
    infidelity, drift = 0.0, 0.0
    for p, t in oracle_grid():
        result = integrate_lab(p, t, cfg, ops)
        infidelity = max(infidelity, 1 - result.fidelity_vs(gate(p, t, ops).u_gate))
        drift = max(drift, result.norm_drift)

    static = ModelParams(1.0, 0.0, 0.0)
    exact = expm_i_hermitian(h0(static, ops), 10.0)
    static_err = frobenius_norm(integrate_lab(static, 10.0, cfg, ops).u_numeric - exact)

    frame = 0.0
    for _ in range(20):
        p = ModelParams(1.0, float(10 ** rng.uniform(-2, 1)), float(rng.uniform(0, 1.4)))
        frame = max(frame, 1 - rotating_frame_check(p, float(rng.uniform(0, 20)), cfg, ops))

    slope, _ = convergence_order(ModelParams(1.0, 0.5, math.pi / 6), 4 * math.pi, ops=ops)

    return [
        CheckResult("oracle-grid", "oracle-propagation", infidelity, tol.fidelity, detail="1 - fidelity, 27 points"),
        CheckResult("oracle-norm-drift", "oracle-propagation", drift, tol.norm_drift),
        CheckResult("oracle-static", "oracle-propagation", static_err, tol.norm_drift),
        CheckResult("rotating-frame", "oracle-propagation", frame, tol.fidelity, detail="1 - fidelity, 20 draws"),
        CheckResult("convergence-order", "oracle-propagation", abs(slope - 4), tol.slope_window,
                    detail=f"slope {slope:.3f}"),
    ]


def run_suite(
    seed: int = DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    cfg: IntegratorConfig | None = None,
    on_group: Callable[[str], None] | None = None,
) -> list[CheckResult]:
    """Run every check; ``seed`` drives every random draw."""
    cfg = cfg or IntegratorConfig()
    rng = np.random.default_rng(seed)
    ops = build_spin_ops()
    points = random_params(rng)

    groups = [
        ("core-linalg", lambda: _linalg_checks(rng, tol)),
        ("spin-model", lambda: _spin_checks(ops, rng, tol)),
        ("diag-chain", lambda: _diag_checks(points, ops, tol)),
        ("connection", lambda: _connection_checks(points, ops, tol)),
        ("gate", lambda: _gate_checks(ops, tol)),
        ("adiabatic", lambda: _adiabatic_checks(ops, tol)),
        ("oracle", lambda: _oracle_checks(rng, ops, tol, cfg)),
    ]
    results: list[CheckResult] = []
    for label, run in groups:
        if on_group:
            on_group(label)
        results.extend(run())
    failed = [r.name for r in results if not r.passed]
    log.debug("verify: %d checks, %d failed %s", len(results), len(failed), failed)
    return results
