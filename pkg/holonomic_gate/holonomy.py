"""Effective gauge potential and the closed-form gate propagator.

The rotating, tilted frame is reached with F = V w, where V = exp(-i theta J2)
and w is the constant diagonalizer. In that frame the lab propagator splits
into a geometric and a dynamical factor with no time ordering:

    U_lab(t) = F exp(-i omega1 t A) exp(-i h_d t) F^dagger,   A = w^dagger V^dagger J3 V w
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import PARTICIPATION_THRESHOLD
from .diagonalize import DiagChain, diagonalize
from .errors import DomainError
from .linalg import (
    SIGMA_0,
    SIGMA_1,
    SIGMA_2,
    SIGMA_3,
    ComplexMat4,
    adjoint,
    blocks,
    expm_i_hermitian,
    frobenius_norm,
    from_blocks,
    identity,
    off_block_norm,
)
from .settings import DEFAULT_TOLERANCES, Tolerances
from .spin import (
    ModelParams,
    SpinOps,
    build_spin_ops,
    field_rotation,
    h_rot,
    rotating_frame,
    tilted_generator,
)

log = logging.getLogger(__name__)


class ConnectionSource(Enum):
    DERIVED = "derived"
    PRINTED = "printed"


@dataclass(frozen=True)
class BlockCoefficients:
    """2x2 block written as a I + b sigma_3 + c sigma_1 + d sigma_2."""

    a: complex
    b: complex
    c: complex
    d: complex = 0j

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    def matrix(self) -> np.ndarray:
        return self.a * SIGMA_0 + self.b * SIGMA_3 + self.c * SIGMA_1 + self.d * SIGMA_2


def pauli_coefficients(block: np.ndarray) -> BlockCoefficients:
    """Orthogonal projection of a 2x2 block onto {I, sigma_3, sigma_1, sigma_2}."""
    m = np.asarray(block, dtype=complex)
    project = lambda sigma: complex(np.trace(sigma @ m) / 2)  # noqa: E731
    return BlockCoefficients(
        a=project(SIGMA_0), b=project(SIGMA_3), c=project(SIGMA_1), d=project(SIGMA_2)
    )


@dataclass(frozen=True, eq=False)
class ConnectionForm:
    """Connection matrix with its block decomposition."""

    a_full: ComplexMat4
    a32: BlockCoefficients
    a12: BlockCoefficients
    a_tr: BlockCoefficients
    source: ConnectionSource

    @property
    def transfer_norm(self) -> float:
        """Frobenius norm of the 3/2 -> 1/2 transfer block."""
        return frobenius_norm(blocks(self.a_full)[1])

    @classmethod
    def from_matrix(cls, a_full: ComplexMat4, source: ConnectionSource) -> ConnectionForm:
        ul, ur, _, lr = blocks(a_full)
        return cls(
            a_full=a_full,
            a32=pauli_coefficients(ul),
            a12=pauli_coefficients(lr),
            a_tr=pauli_coefficients(ur),
            source=source,
        )


def connection_derived(chain: DiagChain, ops: SpinOps) -> ConnectionForm:
    """A = w^dagger (cos(theta) J3 - sin(theta) J1) w."""
    w = chain.w
    a = adjoint(w) @ tilted_generator(chain.params, ops) @ w
    a = (a + a.conj().T) / 2
    return ConnectionForm.from_matrix(a, ConnectionSource.DERIVED)


def connection_printed(chain: DiagChain) -> ConnectionForm:
    """Evaluate the published block coefficient formulas literally.

    The stray d(phi) factors in two of the printed lines are dropped. Used for
    the errata comparison only; gates always use connection_derived.
    """
    (b11, b12), (b21, b22) = chain.beta1, chain.beta2
    ca, sa = math.cos(chain.alpha), math.sin(chain.alpha)

    a32 = BlockCoefficients(
        a=(3 * b11**2 - 3 * b12**2 + ca * (b21**2 - b22**2)) / 4,
        b=(3 * b11**2 + 3 * b12**2 + ca * (b21**2 + b22**2)) / 4,
        c=-0.5 * sa * b21 * b22,
    )
    a12 = BlockCoefficients(
        a=(3 * b21**2 - 3 * b22**2 + ca * (b11**2 - b12**2)) / 4,
        b=(3 * b21**2 + 3 * b22**2 + ca * (b11**2 + b12**2)) / 4,
        c=-0.5 * sa * b11 * b12,
    )
    beta1, beta2 = np.diag(chain.beta1), np.diag(chain.beta2)
    tr = 0.5 * (3 - ca) * (beta1 @ beta2 @ SIGMA_3) + 0.5 * sa * (beta2 @ SIGMA_1 @ beta1)
    full = from_blocks(a32.matrix(), tr, tr.conj().T, a12.matrix())
    return ConnectionForm(
        a_full=full,
        a32=a32,
        a12=a12,
        a_tr=pauli_coefficients(tr),
        source=ConnectionSource.PRINTED,
    )


# ── Gate propagator ──────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class GateResult:
    """Lab-frame gate over duration t together with its factorization."""

    u_gate: ComplexMat4
    u_geometric: ComplexMat4
    u_dynamic: ComplexMat4
    frame: ComplexMat4
    t: float
    params: ModelParams
    chain: DiagChain
    connection: ConnectionForm

    def factorized(self) -> ComplexMat4:
        """F exp(-i omega1 t A) exp(-i h_d t) F^dagger; equals u_gate."""
        return self.frame @ self.u_geometric @ self.u_dynamic @ adjoint(self.frame)


def _check_time(t: float) -> None:
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be finite and >= 0 (got {t})")


def lab_propagator(
    p: ModelParams, t: float, ops: SpinOps, tol: Tolerances = DEFAULT_TOLERANCES
) -> ComplexMat4:
    """U1(t) V exp(-i h_rot t) V^dagger."""
    _check_time(t)
    v = field_rotation(p, ops)
    static = expm_i_hermitian(h_rot(p, ops), t, tol.input_check)
    return rotating_frame(t, p, ops) @ v @ static @ adjoint(v)


def interval_propagator(
    p: ModelParams, t0: float, t1: float, ops: SpinOps, tol: Tolerances = DEFAULT_TOLERANCES
) -> ComplexMat4:
    """Lab propagator from t0 to t1: U1(t1) V exp(-i h_rot (t1 - t0)) V^dagger U1(t0)^dagger."""
    v = field_rotation(p, ops)
    static = expm_i_hermitian(h_rot(p, ops), t1 - t0, tol.input_check)
    return rotating_frame(t1, p, ops) @ v @ static @ adjoint(v) @ adjoint(rotating_frame(t0, p, ops))


def gate(
    p: ModelParams,
    t: float,
    ops: SpinOps | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> GateResult:
    """Closed-form lab propagator over [0, t] and its geometric/dynamical factors."""
    _check_time(t)
    ops = ops or build_spin_ops()
    chain = diagonalize(p, ops, tol)
    connection = connection_derived(chain, ops)

    u_geometric = expm_i_hermitian(connection.a_full, p.omega1 * t, tol.input_check)
    u_dynamic = np.diag(np.exp(-1j * np.array(chain.energies) * t))
    frame = field_rotation(p, ops) @ chain.w
    u_gate = lab_propagator(p, t, ops, tol) if t > 0 else identity()

    return GateResult(
        u_gate=u_gate,
        u_geometric=u_geometric,
        u_dynamic=u_dynamic,
        frame=frame,
        t=t,
        params=p,
        chain=chain,
        connection=connection,
    )


def gate_composed(
    p: ModelParams, t: float, n: int, ops: SpinOps | None = None
) -> ComplexMat4:
    """Product of ``n`` equal-interval propagators, latest interval on the left."""
    _check_time(t)
    if n < 1:
        raise DomainError(f"n must be >= 1 (got {n})")
    ops = ops or build_spin_ops()
    edges = np.linspace(0.0, t, n + 1)
    u = identity()
    for t0, t1 in zip(edges[:-1], edges[1:]):
        u = interval_propagator(p, float(t0), float(t1), ops) @ u
    return u


# ── Characterization ─────────────────────────────────────────


@dataclass(frozen=True)
class MixingReport:
    participation: tuple[int, ...]
    transfer_norm: float

    @property
    def max_participation(self) -> int:
        return max(self.participation)

    @property
    def creates_superposition(self) -> bool:
        return self.max_participation >= 2


def characterize_gate(g: GateResult, threshold: float = PARTICIPATION_THRESHOLD) -> MixingReport:
    """Per-column participation counts and the 3/2 <-> 1/2 transfer norm of u_gate."""
    weights = np.abs(g.u_gate) ** 2
    counts = tuple(int(n) for n in (weights > threshold).sum(axis=0))
    return MixingReport(participation=counts, transfer_norm=off_block_norm(g.u_gate))


def per_period_transfer(p: ModelParams, ops: SpinOps | None = None) -> float:
    """Off-block norm of the one-revolution propagator in the energy basis of H(0).

    The energy eigenspaces of H(0) are V span{|+-3/2>} and V span{|+-1/2>}.
    """
    if not p.omega1 > 0:
        raise DomainError("per-period transfer needs omega1 > 0")
    ops = ops or build_spin_ops()
    period = 2 * math.pi / p.omega1
    v = field_rotation(p, ops)
    transfer = off_block_norm(adjoint(v) @ lab_propagator(p, period, ops) @ v)
    log.debug("per-period transfer omega0=%g omega1=%g: %.3e", p.omega0, p.omega1, transfer)
    return transfer
