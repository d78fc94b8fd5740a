"""Constant diagonalizer of the rotating-frame Hamiltonian.

The chain has three factors, ``w = u2 @ u3 @ u4``:

* ``u2`` rotates the |1/2> pair so the lower block only carries sigma_3,
* ``u3`` mixes each (3/2, 1/2) pair with real coefficients beta1, beta2,
* ``u4`` is the exact completion. ``u2`` also rotates the transfer block,
  so the first two factors alone leave an off-diagonal residue whenever
  theta > 0; ``u4`` removes it and restores the basis slot order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import K_ASYMPTOTIC, PHASE_FLOOR, THETA_MAX, XI_FLOOR_FACTOR
from .errors import DegenerateCoupling, DomainError, UnitarityViolation
from .linalg import (
    ComplexMat4,
    adjoint,
    frobenius_norm,
    from_blocks,
    hermitian_eig,
    identity,
    is_diagonal,
    off_diagonal_norm,
)
from .settings import DEFAULT_TOLERANCES, Tolerances
from .spin import ModelParams, SpinOps, h_rot

log = logging.getLogger(__name__)

Pair = tuple[float, float]


@dataclass(frozen=True, eq=False)
class DiagChain:
    """Every intermediate of the diagonalization, kept for reporting."""

    params: ModelParams
    alpha: float
    u2: ComplexMat4
    u3: ComplexMat4
    u4: ComplexMat4
    lambda1: Pair
    lambda2: Pair
    xi: float
    k: Pair | None
    mu: Pair | None
    beta1: Pair
    beta2: Pair
    h_d: ComplexMat4
    w: ComplexMat4
    chain_residual: float
    coupled: bool = True
    energies: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in np.real(np.diag(self.h_d))))


# ── Scalar pieces ────────────────────────────────────────────


def alpha_of_theta(theta: float) -> float:
    """Block rotation angle with tan(alpha) = 2 tan(theta)."""
    if not (math.isfinite(theta) and 0 <= theta <= THETA_MAX):
        raise DomainError(f"theta must satisfy 0 <= theta < pi/2 (got {theta})")
    return math.atan(2 * math.tan(theta))


def lambdas_xi(p: ModelParams, alpha: float) -> tuple[Pair, Pair, float]:
    """Diagonal entries of the two blocks after u2, and the pair coupling xi."""
    c = math.cos(p.theta)
    upper = 1.5 * p.omega1 * c
    lower = 0.5 * p.omega1 * c / math.cos(alpha)
    lambda1 = (p.omega0 - upper, p.omega0 + upper)
    lambda2 = (-p.omega0 - lower, -p.omega0 + lower)
    xi = p.omega1 * (math.sqrt(3) / 2) * math.sin(p.theta)
    return lambda1, lambda2, xi


def _positive_root(k: float) -> float:
    """k + sqrt(1 + k^2), without cancellation for negative k."""
    s = math.hypot(1.0, k)
    return k + s if k >= 0 else 1.0 / (s - k)


def mu_k(lambda1: Pair, lambda2: Pair, xi: float, *, xi_floor: float = 0.0) -> tuple[Pair, Pair]:
    """Ratios k = (lambda1 - lambda2) / (2 xi) and the mixing roots mu = beta2 / beta1.

    Raises DegenerateCoupling when |xi| <= xi_floor.
    """
    if abs(xi) <= xi_floor:
        raise DegenerateCoupling(f"|xi| = {abs(xi):.3e} is at or below the floor {xi_floor:.3e}")
    k = tuple((l1 - l2) / (2 * xi) for l1, l2 in zip(lambda1, lambda2))
    mu = tuple(_positive_root(ki) for ki in k)
    return k, mu


def _beta_pair(k: float) -> tuple[float, float]:
    if abs(k) > K_ASYMPTOTIC:
        small = 1 / (2 * abs(k)) * (1 - 3 / (8 * k * k))
        large = 1 - 1 / (8 * k * k)
        return (small, large) if k > 0 else (large, small)
    s = math.hypot(1.0, k)
    if k >= 0:
        b1_sq = 1 / (2 * s * (k + s))
        b2_sq = (k + s) / (2 * s)
    else:
        b1_sq = (s - k) / (2 * s)
        b2_sq = 1 / (2 * s * (s - k))
    return math.sqrt(b1_sq), math.sqrt(b2_sq)


def betas(k: Pair) -> tuple[Pair, Pair]:
    """Non-negative mixing coefficients (beta1, beta2) for each pair."""
    pairs = [_beta_pair(ki) for ki in k]
    return (pairs[0][0], pairs[1][0]), (pairs[0][1], pairs[1][1])


# ── Matrix factors ───────────────────────────────────────────


def build_u2(alpha: float) -> ComplexMat4:
    """Identity on the 3/2 block; rotation by alpha/2 on the 1/2 block."""
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    lower = np.array([[c, s], [-s, c]], dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    return from_blocks(np.eye(2), zero, zero, lower)


def build_u3(beta1: Pair, beta2: Pair, tol: float = DEFAULT_TOLERANCES.diagonalization) -> ComplexMat4:
    """Real orthogonal pair mixer [[beta1, beta2], [-beta2, beta1]] with diagonal blocks."""
    residual = max(abs(b1 * b1 + b2 * b2 - 1) for b1, b2 in zip(beta1, beta2))
    if residual > tol:
        raise UnitarityViolation(f"beta1^2 + beta2^2 deviates from 1 by {residual:.3e}")
    b1, b2 = np.diag(beta1), np.diag(beta2)
    return from_blocks(b1, b2, -b2, b1)


def condition_residual(chain: DiagChain) -> Pair:
    """xi (beta1^2 - beta2^2) + (lambda1 - lambda2) beta1 beta2 for each pair."""
    return tuple(
        chain.xi * (b1 * b1 - b2 * b2) + (l1 - l2) * b1 * b2
        for b1, b2, l1, l2 in zip(chain.beta1, chain.beta2, chain.lambda1, chain.lambda2)
    )


def relative_off_diagonal(w: ComplexMat4, h: ComplexMat4) -> float:
    """Off-diagonal mass of w^dagger h w relative to the norm of h."""
    scale = frobenius_norm(h)
    if scale == 0:
        return 0.0
    return off_diagonal_norm(adjoint(w) @ h @ w) / scale


def _slot_assignment(frame: ComplexMat4, cols: ComplexMat4) -> np.ndarray:
    """Column of ``cols`` that best matches each column of ``frame`` (max total overlap)."""
    overlap = np.abs(adjoint(frame) @ cols) ** 2
    rows, picked = linear_sum_assignment(overlap, maximize=True)
    return picked[np.argsort(rows)]


def _complete(h: ComplexMat4, u2: ComplexMat4, chain: ComplexMat4, tol: Tolerances) -> ComplexMat4:
    """Exact diagonalizer, slot-ordered against the u2 frame."""
    if is_diagonal(h, tol.output_check):
        return identity()
    if relative_off_diagonal(chain, h) <= tol.output_check:
        order = _slot_assignment(u2, chain)
        if np.array_equal(order, np.arange(4)):
            log.debug("two-factor chain already diagonal; no completion")
            return chain

    _, vecs = hermitian_eig(h, tol.input_check)
    w = vecs[:, _slot_assignment(u2, vecs)]
    slot = np.diag(adjoint(u2) @ w)
    for i, z in enumerate(slot):
        if abs(z) > PHASE_FLOOR:
            w[:, i] *= abs(z) / z
    return w


def diagonalize(p: ModelParams, ops: SpinOps, tol: Tolerances = DEFAULT_TOLERANCES) -> DiagChain:
    """Build the full chain for ``p``; h_d keeps the basis slot order."""
    h = h_rot(p, ops)
    alpha = alpha_of_theta(p.theta)
    lambda1, lambda2, xi = lambdas_xi(p, alpha)
    u2 = build_u2(alpha)

    try:
        k, mu = mu_k(lambda1, lambda2, xi, xi_floor=XI_FLOOR_FACTOR * max(p.omega0, p.omega1))
    except DegenerateCoupling as exc:
        log.debug("uncoupled pairs (%s); u3 = I", exc)
        k = mu = None
        beta1, beta2 = (1.0, 1.0), (0.0, 0.0)
        coupled = False
    else:
        beta1, beta2 = betas(k)
        coupled = True
    u3 = build_u3(beta1, beta2, tol.diagonalization)

    chain = u2 @ u3
    residual = relative_off_diagonal(chain, h)
    w = _complete(h, u2, chain, tol)
    u4 = adjoint(chain) @ w
    h_d = np.diag(np.real(np.diag(adjoint(w) @ h @ w))).astype(complex)
    log.debug(
        "diagonalize omega0=%g omega1=%g theta=%g: chain residual %.2e",
        p.omega0, p.omega1, p.theta, residual,
    )

    return DiagChain(
        params=p,
        alpha=alpha,
        u2=u2,
        u3=u3,
        u4=u4,
        lambda1=lambda1,
        lambda2=lambda2,
        xi=xi,
        k=k,
        mu=mu,
        beta1=beta1,
        beta2=beta2,
        h_d=h_d,
        w=w,
        chain_residual=residual,
        coupled=coupled,
    )
