"""Reconciliation of the printed derivation with the construction used here.

Lists the known discrepancies of the printed derivation and tabulates the
connection coefficients from the printed formulas next to the derived ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import SCHEMA_VERSION
from .diagonalize import diagonalize
from .holonomy import ConnectionForm, connection_derived, connection_printed
from .linalg import blocks, frobenius_norm
from .settings import DEFAULT_TOLERANCES, Tolerances
from .spin import ModelParams, build_spin_ops


@dataclass(frozen=True)
class Erratum:
    key: str
    anchor: str
    printed: str
    used: str
    resolution: str


ERRATA: tuple[Erratum, ...] = (
    Erratum(
        key="j2-hermiticity",
        anchor="Then two other projection operators are",
        printed="J2 matrix whose transpose is not its complex conjugate",
        used="J2 = (J+ - J-) / 2i from the ladder operators, permuted into (3/2, -3/2, 1/2, -1/2)",
        resolution="all three operators rebuilt from the canonical ladder algebra",
    ),
    Erratum(
        key="lab-exponent-order",
        anchor="laboratory frame the Hamiltonian takes the form",
        printed="exponents exp(i phi J2) exp(i theta J3), inconsistent with the left-hand factors",
        used="R(t) = exp(-i omega1 t J3) exp(-i theta J2)",
        resolution="order taken from the left-hand factors; pinned by the integrator",
    ),
    Erratum(
        key="rotating-sin-theta",
        anchor="In the rotating frame we get",
        printed="3/2 <-> 1/2 coupling written as sqrt(3)/2 omega1 without sin(theta)",
        used="xi = sqrt(3)/2 omega1 sin(theta), matching the later definition of xi",
        resolution="first-principles rotating-frame Hamiltonian carries sin(theta)",
    ),
    Erratum(
        key="block-rotation-generator",
        anchor="block-diagonal transformation",
        printed="U2 = diag(1, exp(-i alpha sigma_3)), which cannot remove a sigma_1 term",
        used="rotation by alpha/2 generated by sigma_2 on the 1/2 block",
        resolution=(
            "reproduces the stated sigma_3-only lower block; it also rotates the "
            "transfer block, so an exact completion factor u4 follows U2 U3"
        ),
    ),
    Erratum(
        key="stray-dphi",
        anchor="After some algebra we get for the matrix elements",
        printed="d(phi) factors inside two of the coefficient lines of A",
        used="coefficients without d(phi); the 1-form already carries it",
        resolution="dropped when evaluating the printed coefficients",
    ),
)


DELTA_GRID = tuple(
    ModelParams(1.0, omega1, theta)
    for omega1 in (0.5, 1.0)
    for theta in (0.0, math.pi / 6, math.pi / 4, math.pi / 3)
)


def _coeffs(form: ConnectionForm) -> dict[str, list[float]]:
    return {
        "a32": [c.real for c in form.a32.as_tuple()[:3]],
        "a12": [c.real for c in form.a12.as_tuple()[:3]],
    }


@dataclass(frozen=True)
class DeltaRow:
    params: ModelParams
    printed: dict[str, list[float]]
    derived: dict[str, list[float]]
    transfer_delta: float
    full_delta: float
    chain_residual: float

    @property
    def delta(self) -> dict[str, list[float]]:
        return {
            blk: [p - d for p, d in zip(self.printed[blk], self.derived[blk])] for blk in ("a32", "a12")
        }

    def to_dict(self) -> dict:
        return {
            **self.params.to_dict(),
            "printed": self.printed,
            "derived": self.derived,
            "delta": self.delta,
            "transfer_delta": self.transfer_delta,
            "full_delta": self.full_delta,
            "chain_residual": self.chain_residual,
        }


def delta_row(p: ModelParams, tol: Tolerances = DEFAULT_TOLERANCES) -> DeltaRow:
    ops = build_spin_ops()
    chain = diagonalize(p, ops, tol)
    derived = connection_derived(chain, ops)
    printed = connection_printed(chain)
    return DeltaRow(
        params=p,
        printed=_coeffs(printed),
        derived=_coeffs(derived),
        transfer_delta=frobenius_norm(blocks(printed.a_full)[1] - blocks(derived.a_full)[1]),
        full_delta=frobenius_norm(printed.a_full - derived.a_full),
        chain_residual=chain.chain_residual,
    )


@dataclass(frozen=True)
class ErrataReport:
    errata: tuple[Erratum, ...]
    rows: tuple[DeltaRow, ...]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "errata": [e.__dict__.copy() for e in self.errata],
            "delta_table": [r.to_dict() for r in self.rows],
        }

    def to_text(self) -> str:
        lines = ["Discrepancies", "============="]
        for e in self.errata:
            lines += [
                f"[{e.key}]",
                f"  anchor:     \"{e.anchor}\"",
                f"  printed:    {e.printed}",
                f"  used:       {e.used}",
                f"  resolution: {e.resolution}",
            ]
        lines += ["", "Printed vs derived connection coefficients (a I + b s3 + c s1)", "=" * 62]
        fmt = lambda xs: " ".join(f"{x:+.6f}" for x in xs)  # noqa: E731
        for r in self.rows:
            p = r.params
            lines.append(f"omega0={p.omega0:g} omega1={p.omega1:g} theta={p.theta:.6f}")
            for blk in ("a32", "a12"):
                lines.append(
                    f"  {blk} printed {fmt(r.printed[blk])}  derived {fmt(r.derived[blk])}"
                    f"  delta {fmt(r.delta[blk])}"
                )
            lines.append(
                f"  transfer delta {r.transfer_delta:.6e}  full delta {r.full_delta:.6e}"
                f"  chain residual {r.chain_residual:.6e}"
            )
        return "\n".join(lines) + "\n"


def build_report(grid: tuple[ModelParams, ...] = DELTA_GRID, tol: Tolerances = DEFAULT_TOLERANCES) -> ErrataReport:
    return ErrataReport(errata=ERRATA, rows=tuple(delta_row(p, tol) for p in grid))
