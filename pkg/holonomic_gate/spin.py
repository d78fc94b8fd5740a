"""Spin-3/2 operators and the quadrupole Hamiltonians in lab and rotating frames."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import CASIMIR, M_VALUES, QUADRUPOLE_SHIFT, SPIN, THETA_MAX
from .errors import DomainError
from .linalg import ComplexMat4, adjoint, expm_i_hermitian, identity, mat_mul

# Canonical index (m = 3/2, 1/2, -1/2, -3/2) of each slot in the package basis
_SLOT_FROM_CANONICAL = (0, 3, 1, 2)


@dataclass(frozen=True)
class SpinOps:
    """Angular momentum components for j = 3/2 (hbar = 1)."""

    j1: ComplexMat4
    j2: ComplexMat4
    j3: ComplexMat4

    def along(self, n: ArrayLike) -> ComplexMat4:
        """J . n for a 3-vector n."""
        nx, ny, nz = n
        return nx * self.j1 + ny * self.j2 + nz * self.j3


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs: quadrupole frequency, rotation frequency and field tilt."""

    omega0: float
    omega1: float
    theta: float

    def __post_init__(self):
        for name in ("omega0", "omega1", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite (got {getattr(self, name)})")
        if self.omega0 < 0:
            raise DomainError(f"omega0 must be >= 0 (got {self.omega0})")
        if self.omega1 < 0:
            raise DomainError(f"omega1 must be >= 0 (got {self.omega1})")
        if not 0 <= self.theta <= THETA_MAX:
            raise DomainError(
                f"theta must satisfy 0 <= theta < pi/2 (at most {THETA_MAX:.9f}); got {self.theta}"
            )

    @property
    def alpha(self) -> float:
        """Block rotation angle, tan(alpha) = 2 tan(theta)."""
        return math.atan(2 * math.tan(self.theta))

    def require_field(self) -> ModelParams:
        """Reject the field-free point where the quadrupole splitting vanishes."""
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be > 0 here (got {self.omega0})")
        return self

    def to_dict(self) -> dict:
        return {"omega0": self.omega0, "omega1": self.omega1, "theta": self.theta}


def build_spin_ops() -> SpinOps:
    """Build J1, J2, J3 from the ladder operators and permute into the package basis."""
    m = np.array([SPIN - k for k in range(4)])       # 3/2, 1/2, -1/2, -3/2
    jp = np.zeros((4, 4), dtype=complex)
    for k in range(1, 4):
        jp[k - 1, k] = math.sqrt(CASIMIR - m[k] * (m[k] + 1))
    jm = jp.conj().T

    perm = np.array(_SLOT_FROM_CANONICAL)
    take = lambda a: a[np.ix_(perm, perm)]  # noqa: E731
    j1 = take((jp + jm) / 2)
    j2 = take((jp - jm) / 2j)
    j3 = np.diag(np.array(M_VALUES, dtype=complex))
    return SpinOps(j1=j1, j2=j2, j3=j3)


def h0(p: ModelParams, ops: SpinOps) -> ComplexMat4:
    """Static quadrupole Hamiltonian, field along z."""
    return p.omega0 * (ops.j3 @ ops.j3 - QUADRUPOLE_SHIFT * identity())


def field_direction(phi: float, theta: float) -> tuple[float, float, float]:
    return (
        math.sin(theta) * math.cos(phi),
        math.sin(theta) * math.sin(phi),
        math.cos(theta),
    )


def h_field(phi: float, p: ModelParams, ops: SpinOps) -> ComplexMat4:
    """Quadrupole Hamiltonian with the field at azimuth ``phi`` and tilt theta."""
    jn = ops.along(field_direction(phi, p.theta))
    return p.omega0 * (jn @ jn - QUADRUPOLE_SHIFT * identity())


def h_lab(t: float, p: ModelParams, ops: SpinOps) -> ComplexMat4:
    """Lab-frame Hamiltonian at time t; the field azimuth is omega1 * t."""
    return h_field(p.omega1 * t, p, ops)


def h_lab_series(times: ArrayLike, p: ModelParams, ops: SpinOps) -> NDArray[np.complex128]:
    """H(t) for many times at once, shape (len(times), 4, 4).

    H(t) = exp(-i w1 t J3) H(0) exp(i w1 t J3) and J3 is diagonal, so each
    entry only picks up the phase exp(-i w1 t (m_a - m_b)).
    """
    t = np.asarray(times, dtype=float)
    m = np.array(M_VALUES)
    phase = np.exp(-1j * p.omega1 * t[:, None] * m[None, :])
    return h_lab(0.0, p, ops)[None, :, :] * phase[:, :, None] * phase.conj()[:, None, :]


def field_rotation(p: ModelParams, ops: SpinOps) -> ComplexMat4:
    """V = exp(-i theta J2): tilts the z axis onto the field direction at t = 0."""
    return expm_i_hermitian(ops.j2, p.theta)


def rotating_frame(t: float, p: ModelParams, ops: SpinOps) -> ComplexMat4:
    """U1(t) = exp(-i omega1 t J3)."""
    return expm_i_hermitian(ops.j3, p.omega1 * t)


def lab_rotation(t: float, p: ModelParams, ops: SpinOps) -> ComplexMat4:
    """R(t) = U1(t) V, so that h_lab(t) = R(t) h0 R(t)^dagger."""
    return mat_mul(rotating_frame(t, p, ops), field_rotation(p, ops))


def tilted_generator(p: ModelParams, ops: SpinOps) -> ComplexMat4:
    """exp(i theta J2) J3 exp(-i theta J2) = cos(theta) J3 - sin(theta) J1."""
    v = field_rotation(p, ops)
    g = adjoint(v) @ ops.j3 @ v
    return (g + g.conj().T) / 2


def h_rot(p: ModelParams, ops: SpinOps) -> ComplexMat4:
    """Static Hamiltonian of the co-rotating, tilted frame.

    Built as exp(i theta J2) (U1^dagger H U1 - omega1 J3) exp(-i theta J2) at
    t = 0, which equals w0 (J3^2 - 5/4) - w1 (cos(theta) J3 - sin(theta) J1).
    The constant -5/4 w0 shift is kept.
    """
    u1 = rotating_frame(0.0, p, ops)
    v = field_rotation(p, ops)
    co_rotating = adjoint(u1) @ h_lab(0.0, p, ops) @ u1 - p.omega1 * ops.j3
    h = adjoint(v) @ co_rotating @ v
    return (h + h.conj().T) / 2
