"""Adiabatic (Wilczek-Zee) connection of the degenerate eigenspaces of H(phi).

H(phi) has two doubly degenerate levels: +omega0 spanned by the field-aligned
m = +-3/2 states, -omega0 by m = +-1/2. The adiabatic connection inside each
level is computed by finite differences, and the holonomy of one field
revolution by a discrete Wilson loop. In the limit omega1/omega0 -> 0 the
diagonal blocks of the non-adiabatic connection approach these.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar
from scipy.optimize import linear_sum_assignment

from .config import BLOCK_12, BLOCK_32, DEFAULT_FD_STEP, DEFAULT_LOOP_POINTS
from .diagonalize import diagonalize
from .errors import DomainError
from .holonomy import connection_derived
from .linalg import hermitian_eig
from .settings import DEFAULT_TOLERANCES, Tolerances
from .spin import ModelParams, SpinOps, build_spin_ops, field_direction, h_field

log = logging.getLogger(__name__)

LEVELS = ("3/2", "1/2")


def degenerate_frame(phi: float, p: ModelParams, ops: SpinOps, level: str) -> np.ndarray:
    """4x2 orthonormal basis of one degenerate level, ordered by descending m along the field.

    Columns are only fixed up to a phase each.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS} (got {level!r})")
    p.require_field()
    _, vecs = hermitian_eig(h_field(phi, p, ops))
    sub = vecs[:, 2:] if level == "3/2" else vecs[:, :2]

    jn = ops.along(field_direction(phi, p.theta))
    _, rot = np.linalg.eigh(sub.conj().T @ jn @ sub)
    return sub @ rot[:, ::-1]


def _align(ref: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Rephase each column of ``cols`` so its overlap with ``ref`` is real positive."""
    overlap = np.einsum("ij,ij->j", ref.conj(), cols)
    return cols * (np.abs(overlap) / overlap)


def wz_connection(
    phi: float, p: ModelParams, ops: SpinOps, level: str, step: float = DEFAULT_FD_STEP
) -> np.ndarray:
    """A_ab = i <Phi_a | d Phi_b / d phi> by central differences.

    Neighbouring frames are rephased against the frame at ``phi``, so the
    diagonal is gauge-dependent; off-diagonal magnitudes are not.
    """
    s0 = degenerate_frame(phi, p, ops, level)
    plus = _align(s0, degenerate_frame(phi + step, p, ops, level))
    minus = _align(s0, degenerate_frame(phi - step, p, ops, level))
    return 1j * s0.conj().T @ (plus - minus) / (2 * step)


def wilson_loop(
    p: ModelParams, ops: SpinOps, level: str, points: int = DEFAULT_LOOP_POINTS
) -> np.ndarray:
    """Holonomy of one revolution in the basis of the level at phi = 0.

    Product of the polar (unitary) parts of consecutive frame overlaps, so the
    arbitrary column phases of each frame cancel.
    """
    if points < 3:
        raise DomainError(f"loop needs at least 3 points (got {points})")
    phis = np.linspace(0.0, 2 * math.pi, points, endpoint=False)
    frames = [degenerate_frame(float(phi), p, ops, level) for phi in phis]
    frames.append(frames[0])

    w = np.eye(2, dtype=complex)
    for prev, nxt in zip(frames[:-1], frames[1:]):
        u, _ = polar(nxt.conj().T @ prev)
        w = u @ w
    return w


def adiabatic_generator(p: ModelParams, level: str) -> np.ndarray:
    """Adiabatic limit of the connection block in the field-aligned m basis."""
    c, s = math.cos(p.theta), math.sin(p.theta)
    if level == "3/2":
        return np.diag([1.5 * c, -1.5 * c]).astype(complex)
    return np.array([[0.5 * c, -s], [-s, -0.5 * c]], dtype=complex)


def expected_loop_eigenvalues(p: ModelParams, level: str) -> np.ndarray:
    """-exp(2 pi i lambda) over the eigenvalues lambda of the adiabatic block.

    The sign is the 2 pi rotation of a half-integer spin.
    """
    lam = np.linalg.eigvalsh(adiabatic_generator(p, level))
    return -np.exp(2j * math.pi * lam)


def spectrum_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest gap between two eigenvalue sets under the best pairing."""
    cost = np.abs(np.subtract.outer(np.asarray(a), np.asarray(b)))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


@dataclass(frozen=True)
class AdiabaticReport:
    params: ModelParams
    loop_points: int
    wz_offdiag: dict[str, float]
    loop_eigenvalues: dict[str, tuple[complex, ...]]
    loop_error: dict[str, float]
    derived_block_spectrum: dict[str, tuple[float, ...]]
    adiabatic_block_spectrum: dict[str, tuple[float, ...]]
    derived_gap: dict[str, float]

    def passed(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return max(self.loop_error.values()) <= tol.wilson_loop

    def to_dict(self) -> dict:
        pairs = lambda zs: [[z.real, z.imag] for z in zs]  # noqa: E731
        return {
            "params": self.params.to_dict(),
            "loop_points": self.loop_points,
            "wz_offdiag": self.wz_offdiag,
            "loop_eigenvalues": {k: pairs(v) for k, v in self.loop_eigenvalues.items()},
            "loop_error": self.loop_error,
            "derived_block_spectrum": {k: list(v) for k, v in self.derived_block_spectrum.items()},
            "adiabatic_block_spectrum": {k: list(v) for k, v in self.adiabatic_block_spectrum.items()},
            "derived_gap": self.derived_gap,
        }


def compare_adiabatic(
    p: ModelParams,
    ops: SpinOps | None = None,
    loop_points: int = DEFAULT_LOOP_POINTS,
    fd_step: float = DEFAULT_FD_STEP,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> AdiabaticReport:
    """Adiabatic connection and holonomy at ``p`` next to the non-adiabatic connection blocks."""
    ops = ops or build_spin_ops()
    p.require_field()
    derived = connection_derived(diagonalize(p, ops, tol), ops).a_full
    block_of = {"3/2": BLOCK_32, "1/2": BLOCK_12}

    wz_offdiag, loop_eigs, loop_err = {}, {}, {}
    derived_spec, adiabatic_spec, gap = {}, {}, {}
    for level in LEVELS:
        a = wz_connection(0.0, p, ops, level, fd_step)
        wz_offdiag[level] = float(abs(a[0, 1]))

        eigs = np.linalg.eigvals(wilson_loop(p, ops, level, loop_points))
        eigs = eigs[np.argsort(np.angle(eigs))]
        loop_eigs[level] = tuple(complex(z) for z in eigs)
        loop_err[level] = spectrum_distance(eigs, expected_loop_eigenvalues(p, level))

        blk = block_of[level]
        d_spec = np.linalg.eigvalsh(derived[blk, blk])
        a_spec = np.linalg.eigvalsh(adiabatic_generator(p, level))
        derived_spec[level] = tuple(float(x) for x in d_spec)
        adiabatic_spec[level] = tuple(float(x) for x in a_spec)
        gap[level] = float(np.max(np.abs(d_spec - a_spec)))

    log.debug("adiabatic comparison at %s: loop errors %s", p.to_dict(), loop_err)
    return AdiabaticReport(
        params=p,
        loop_points=loop_points,
        wz_offdiag=wz_offdiag,
        loop_eigenvalues=loop_eigs,
        loop_error=loop_err,
        derived_block_spectrum=derived_spec,
        adiabatic_block_spectrum=adiabatic_spec,
        derived_gap=gap,
    )
