"""Tolerance record and the optional key = value config file."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .config import (
    ADIABATIC_OFF_BLOCK,
    ALGEBRA_TOL,
    COMPOSITION_TOL,
    CONTINUITY_TOL,
    DIAG_TOL,
    FIDELITY_TOL,
    INPUT_TOL,
    NONADIABATIC_TRANSFER_FLOOR,
    NORM_DRIFT_TOL,
    OUTPUT_TOL,
    SLOPE_WINDOW,
    WILSON_LOOP_TOL,
)
from .errors import ConfigError


@dataclass(frozen=True)
class Tolerances:
    """Every numerical threshold the package checks against, in one place."""

    input_check: float = INPUT_TOL
    output_check: float = OUTPUT_TOL
    algebra: float = ALGEBRA_TOL
    diagonalization: float = DIAG_TOL
    composition: float = COMPOSITION_TOL
    fidelity: float = FIDELITY_TOL
    norm_drift: float = NORM_DRIFT_TOL
    continuity: float = CONTINUITY_TOL
    adiabatic_off_block: float = ADIABATIC_OFF_BLOCK
    slope_window: float = SLOPE_WINDOW
    wilson_loop: float = WILSON_LOOP_TOL

    # Lower bound, not a residual: never replaced by an override
    transfer_floor: float = NONADIABATIC_TRANSFER_FLOOR

    def with_override(self, tol: float | None) -> Tolerances:
        """Replace every upper-bound tolerance with ``tol``."""
        if tol is None:
            return self
        if not tol >= 0:
            raise ConfigError(f"--tol must be non-negative (got {tol})")
        names = [f.name for f in fields(self) if f.name != "transfer_floor"]
        return replace(self, **{n: tol for n in names})

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()


# Config file keys mirror the long flags (dashes become underscores)
CONFIG_KEYS: dict[str, type] = {
    "omega0": float,
    "omega1": float,
    "theta": float,
    "theta_deg": float,
    "t": float,
    "seed": int,
    "tol": float,
    "step_scale": float,
    "concurrency": int,
    "max_grid": int,
    "loop_points": int,
}


def load_config_file(path: str | Path) -> dict:
    """Parse a ``key = value`` file into typed argparse defaults.

    Blank lines and lines starting with ``#`` are ignored. Unknown keys and
    unparsable values raise ConfigError naming the offending line.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"--config: file not found: {path}")

    values: dict = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigError(
                f"{path}:{lineno}: {key} expects {CONFIG_KEYS[key].__name__}, got {value!r}"
            ) from None
    return values
