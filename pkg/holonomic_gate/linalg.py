"""Fixed-size 4x4 complex matrix arithmetic.

All matrices are ``numpy`` arrays of shape (4, 4) and dtype complex128 over the
basis (|3/2>, |-3/2>, |1/2>, |-1/2>). Functions here never mutate their
inputs.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import DIM, EIG_TIE_TOL, INPUT_TOL, PHASE_FLOOR
from .errors import NotHermitian

ComplexMat4 = NDArray[np.complex128]

# 2x2 Pauli matrices used for block projections
SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)


def as_mat4(a: ArrayLike) -> ComplexMat4:
    """Coerce to a complex 4x4 array, rejecting other shapes and non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.shape != (DIM, DIM):
        raise ValueError(f"expected a {DIM}x{DIM} matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def identity() -> ComplexMat4:
    return np.eye(DIM, dtype=complex)


def mat_mul(a: ComplexMat4, b: ComplexMat4) -> ComplexMat4:
    return as_mat4(a) @ as_mat4(b)


def adjoint(a: ComplexMat4) -> ComplexMat4:
    return as_mat4(a).conj().T


def frobenius_norm(a: ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(a), "fro"))


def off_diagonal_norm(a: ArrayLike) -> float:
    """Frobenius norm of everything except the main diagonal."""
    m = np.asarray(a)
    return frobenius_norm(m - np.diag(np.diag(m)))


def commutator(a: ComplexMat4, b: ComplexMat4) -> ComplexMat4:
    return a @ b - b @ a


def trace_fidelity(u: ComplexMat4, v: ComplexMat4) -> float:
    """|tr(u^dagger v)| / dim; equals 1 iff u and v agree up to a global phase."""
    return float(abs(np.trace(u.conj().T @ v)) / u.shape[0])


# ── Predicates ───────────────────────────────────────────────


def hermiticity_residual(a: ArrayLike) -> float:
    m = np.asarray(a)
    return frobenius_norm(m - m.conj().T) / max(1.0, frobenius_norm(m))


def is_hermitian(a: ArrayLike, tol: float = INPUT_TOL) -> bool:
    return hermiticity_residual(a) <= tol


def unitarity_residual(a: ArrayLike) -> float:
    m = np.asarray(a)
    return frobenius_norm(m.conj().T @ m - np.eye(m.shape[0]))


def is_unitary(a: ArrayLike, tol: float = INPUT_TOL) -> bool:
    return unitarity_residual(a) <= tol


def is_diagonal(a: ArrayLike, tol: float = INPUT_TOL) -> bool:
    return off_diagonal_norm(a) <= tol * max(1.0, frobenius_norm(a))


# ── Decompositions ───────────────────────────────────────────


def _fix_phases(vecs: NDArray) -> NDArray:
    """Rotate each column so its first non-negligible component is real positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        lead = np.flatnonzero(np.abs(col) > PHASE_FLOOR)
        if lead.size:
            z = col[lead[0]]
            out[:, j] = col * (abs(z) / z)
    return out


def _tie_order(vals: NDArray, vecs: NDArray) -> NDArray:
    """Ascending eigenvalues; within a degenerate cluster, larger leading component first."""
    scale = max(1.0, float(np.max(np.abs(vals))))
    cluster = np.zeros(len(vals), dtype=int)
    for i in range(1, len(vals)):
        same = vals[i] - vals[i - 1] <= EIG_TIE_TOL * scale
        cluster[i] = cluster[i - 1] if same else cluster[i - 1] + 1

    lead = np.empty(len(vals))
    for j in range(vecs.shape[1]):
        nz = np.flatnonzero(np.abs(vecs[:, j]) > PHASE_FLOOR)
        lead[j] = abs(vecs[nz[0], j]) if nz.size else 0.0
    # lexsort sorts by the last key first
    return np.lexsort((-lead, cluster))


def hermitian_eig(a: ArrayLike, tol: float = INPUT_TOL) -> tuple[NDArray[np.float64], ComplexMat4]:
    """Eigen-decomposition of a Hermitian 4x4 matrix.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvectors as columns. Ties are broken by the descending magnitude of
    the first nonzero component, and each column is phased so that component
    is real positive, so repeated calls give identical output.

    Raises NotHermitian when ``a`` fails the hermiticity check at ``tol``.
    """
    m = as_mat4(a)
    residual = hermiticity_residual(m)
    if residual > tol:
        raise NotHermitian(f"hermiticity residual {residual:.3e} exceeds {tol:.1e}")
    h = (m + m.conj().T) / 2
    vals, vecs = np.linalg.eigh(h)
    vecs = _fix_phases(vecs)
    order = _tie_order(vals, vecs)
    return vals[order], vecs[:, order]


def expm_i_hermitian(h: ArrayLike, t: float, tol: float = INPUT_TOL) -> ComplexMat4:
    """exp(-i h t) for Hermitian ``h``, built from its eigen-decomposition."""
    m = as_mat4(h)
    if t == 0:
        if not is_hermitian(m, tol):
            raise NotHermitian("generator is not Hermitian")
        return identity()
    vals, vecs = hermitian_eig(m, tol)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


# ── 2x2 block helpers ────────────────────────────────────────


def blocks(a: ArrayLike) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    """Split into (upper-left, upper-right, lower-left, lower-right) 2x2 blocks."""
    m = np.asarray(a)
    return m[:2, :2], m[:2, 2:], m[2:, :2], m[2:, 2:]


def from_blocks(ul: ArrayLike, ur: ArrayLike, ll: ArrayLike, lr: ArrayLike) -> ComplexMat4:
    return np.block([[ul, ur], [ll, lr]]).astype(complex)


def off_block_norm(a: ArrayLike) -> float:
    """Frobenius norm of the two off-diagonal 2x2 blocks (3/2 <-> 1/2 transfer)."""
    _, ur, ll, _ = blocks(a)
    return float(np.hypot(frobenius_norm(ur), frobenius_norm(ll)))
