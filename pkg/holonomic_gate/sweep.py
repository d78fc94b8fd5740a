"""Parameter sweeps: grid specification, per-point evaluation and record output.

Grid points are evaluated in a process pool driven from asyncio; rows come
back in the declared grid order whatever the completion order.
"""

from __future__ import annotations

import asyncio
import csv
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, TextIO

import numpy as np

from .cache import OracleCache
from .config import DEFAULT_CONCURRENCY, GRID_CAP, SCHEMA_VERSION, SWEEP_AXES
from .errors import ConfigError, GridTooLarge, HgateError
from .holonomy import characterize_gate, gate
from .oracle import IntegratorConfig, PropagationResult, integrate_lab
from .settings import DEFAULT_TOLERANCES, Tolerances
from .spin import ModelParams

log = logging.getLogger(__name__)

SPACINGS = ("linear", "log")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.name not in SWEEP_AXES:
            raise ConfigError(f"--axis: unknown parameter {self.name!r} (choose from {', '.join(SWEEP_AXES)})")
        if self.count < 1:
            raise ConfigError(f"--axis {self.name}: count must be >= 1 (got {self.count})")
        if self.spacing not in SPACINGS:
            raise ConfigError(f"--axis {self.name}: spacing must be linear or log (got {self.spacing!r})")
        if self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            raise ConfigError(f"--axis {self.name}: log spacing needs a positive range")

    def values(self) -> list[float]:
        if self.count == 1:
            return [float(self.start)]
        make = np.geomspace if self.spacing == "log" else np.linspace
        return [float(v) for v in make(self.start, self.stop, self.count)]


def parse_axis(text: str) -> SweepAxis:
    """Parse ``NAME=START:STOP:COUNT[:linear|log]``."""
    name, sep, rng = text.partition("=")
    parts = rng.split(":")
    if not sep or len(parts) not in (3, 4):
        raise ConfigError(f"--axis: expected NAME=START:STOP:COUNT[:linear|log], got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"--axis: could not parse numbers in {text!r}") from None
    spacing = parts[3] if len(parts) == 4 else "linear"
    return SweepAxis(name=name.strip(), start=start, stop=stop, count=count, spacing=spacing)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[SweepAxis, ...]
    fixed: dict[str, float]
    outputs: tuple[str, ...] = ()
    max_grid: int = GRID_CAP

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"--axis: parameter swept twice ({', '.join(names)})")
        missing = [n for n in SWEEP_AXES if n not in names and n not in self.fixed]
        if missing:
            raise ConfigError(f"no value for {', '.join(missing)}")
        unknown = [f for f in self.outputs if f not in ALL_FIELDS]
        if unknown:
            raise ConfigError(f"--fields: unknown field(s) {', '.join(unknown)}")
        if self.grid_size > self.max_grid:
            raise GridTooLarge(f"grid has {self.grid_size} points, cap is {self.max_grid}")

    @property
    def grid_size(self) -> int:
        return math.prod(a.count for a in self.axes)

    @property
    def fields(self) -> tuple[str, ...]:
        return self.outputs or DEFAULT_FIELDS

    def points(self) -> Iterator[dict[str, float]]:
        """Grid points in declared order, the first axis varying slowest."""
        for combo in itertools.product(*(a.values() for a in self.axes)):
            point = {n: float(self.fixed[n]) for n in SWEEP_AXES if n in self.fixed}
            point.update(zip((a.name for a in self.axes), combo))
            yield point


# ── Records ──────────────────────────────────────────────────

DEFAULT_FIELDS = (
    "omega0", "omega1", "theta", "t",
    "h_d_0", "h_d_1", "h_d_2", "h_d_3",
    "a32_a", "a32_b", "a32_c",
    "a12_a", "a12_b", "a12_c",
    "a_tr_norm",
    "fidelity",
    "part_0", "part_1", "part_2", "part_3",
    "transfer_norm",
    "flagged", "error",
)
ALL_FIELDS = DEFAULT_FIELDS + ("norm_drift", "steps", "wall_time")


@dataclass
class RunRecord:
    """One row of sweep output."""

    omega0: float
    omega1: float
    theta: float
    t: float
    h_d: tuple[float, ...] | None = None
    a32: tuple[float, float, float] | None = None
    a12: tuple[float, float, float] | None = None
    a_tr_norm: float | None = None
    fidelity: float | None = None
    participation: tuple[int, ...] | None = None
    transfer_norm: float | None = None
    norm_drift: float | None = None
    steps: int | None = None
    flagged: bool = False
    error: str = ""
    wall_time: float | None = None
    schema_version: int = field(default=SCHEMA_VERSION)

    def flat(self) -> dict:
        row = {"omega0": self.omega0, "omega1": self.omega1, "theta": self.theta, "t": self.t}
        for prefix, values, size in (
            ("h_d_", self.h_d, 4),
            ("part_", self.participation, 4),
        ):
            for i in range(size):
                row[f"{prefix}{i}"] = values[i] if values else None
        for name, coeffs in (("a32", self.a32), ("a12", self.a12)):
            for letter, i in zip("abc", range(3)):
                row[f"{name}_{letter}"] = coeffs[i] if coeffs else None
        row.update(
            a_tr_norm=self.a_tr_norm,
            fidelity=self.fidelity,
            transfer_norm=self.transfer_norm,
            norm_drift=self.norm_drift,
            steps=self.steps,
            flagged=self.flagged,
            error=self.error,
            wall_time=self.wall_time,
        )
        return row

    def select(self, fields: tuple[str, ...]) -> dict:
        row = self.flat()
        return {f: row[f] for f in fields}


def evaluate_point(
    point: dict[str, float],
    verify: bool = False,
    cfg: IntegratorConfig | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    cached: PropagationResult | None = None,
) -> tuple[RunRecord, PropagationResult | None]:
    """Evaluate one grid point; numerical failures become a flagged row.

    ``tol`` only sets the fidelity bound a verified row is flagged against.
    """
    started = time.perf_counter()
    record = RunRecord(**point)
    propagation = None
    try:
        p = ModelParams(point["omega0"], point["omega1"], point["theta"])
        g = gate(p, point["t"])
        conn = g.connection
        record.h_d = g.chain.energies
        record.a32 = tuple(c.real for c in conn.a32.as_tuple()[:3])
        record.a12 = tuple(c.real for c in conn.a12.as_tuple()[:3])
        record.a_tr_norm = conn.transfer_norm
        mixing = characterize_gate(g)
        record.participation = mixing.participation
        record.transfer_norm = mixing.transfer_norm

        if verify:
            propagation = cached or integrate_lab(p, point["t"], cfg)
            record.fidelity = propagation.fidelity_vs(g.u_gate)
            record.norm_drift = propagation.norm_drift
            record.steps = propagation.steps_taken
            if record.fidelity < 1 - tol.fidelity:
                record.flagged = True
                record.error = f"fidelity {record.fidelity:.9f} below 1 - {tol.fidelity:g}"
    except HgateError as exc:
        record.flagged = True
        record.error = f"{type(exc).__name__}: {exc}"
    record.wall_time = time.perf_counter() - started
    return record, propagation


async def run_sweep(
    spec: SweepSpec,
    verify: bool = False,
    cfg: IntegratorConfig | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    cache: OracleCache | None = None,
    concurrency: int = DEFAULT_CONCURRENCY,
    on_point_done: Callable[[RunRecord], None] | None = None,
) -> list[RunRecord]:
    """Evaluate every grid point of ``spec`` and return the records in grid order."""
    cfg = cfg or IntegratorConfig()
    cache = cache or OracleCache(enabled=False)
    if concurrency < 1:
        raise ConfigError(f"--concurrency must be >= 1 (got {concurrency})")
    loop = asyncio.get_running_loop()
    records: list[RunRecord | None] = [None] * spec.grid_size

    with ProcessPoolExecutor(max_workers=concurrency) as pool:

        async def _run_one(index: int, point: dict[str, float]) -> None:
            cached = None
            if verify:
                try:
                    p = ModelParams(point["omega0"], point["omega1"], point["theta"])
                    cached = cache.get_propagation(p, point["t"], cfg)
                except HgateError:
                    p = None
            record, propagation = await loop.run_in_executor(
                pool, evaluate_point, point, verify, cfg, tol, cached
            )
            if propagation is not None and cached is None:
                cache.set_propagation(p, point["t"], cfg, propagation)
            if record.flagged:
                log.warning("flagged point %s: %s", point, record.error)
            if on_point_done:
                on_point_done(record)
            records[index] = record

        # At most `concurrency` points in flight; the grid is consumed lazily
        pending: set[asyncio.Task] = set()
        for index, point in enumerate(spec.points()):
            if len(pending) >= concurrency:
                done, pending = await asyncio.wait(pending, return_when=asyncio.FIRST_COMPLETED)
                for task in done:
                    task.result()
            pending.add(asyncio.create_task(_run_one(index, point)))
        if pending:
            done, _ = await asyncio.wait(pending)
            for task in done:
                task.result()

    return records


# ── Output ───────────────────────────────────────────────────


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def write_csv(records: list[RunRecord], fields: tuple[str, ...], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(fields)
    for r in records:
        row = r.select(fields)
        writer.writerow([_csv_value(row[f]) for f in fields])


def write_jsonl(records: list[RunRecord], fields: tuple[str, ...], stream: TextIO) -> None:
    for r in records:
        row = {"schema_version": r.schema_version, **r.select(fields)}
        stream.write(json.dumps(row) + "\n")
