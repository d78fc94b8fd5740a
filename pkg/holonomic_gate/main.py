#!/usr/bin/env python3
"""hgate CLI - closed-form holonomic gates, sweeps, verification and errata."""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn
from rich.table import Table

from . import __version__
from .adiabatic import compare_adiabatic
from .cache import NS_ORACLE, OracleCache
from .checks import run_suite
from .config import (
    BASIS_LABELS,
    DEFAULT_CONCURRENCY,
    DEFAULT_LOOP_POINTS,
    DEFAULT_SEED,
    DEFAULT_STEP_SCALE,
    GRID_CAP,
    PIPE_WIDTH,
    SCHEMA_VERSION,
)
from .errata import build_report
from .errors import ConfigError, DomainError, GridTooLarge, HgateError
from .holonomy import characterize_gate, gate
from .oracle import IntegratorConfig
from .settings import DEFAULT_TOLERANCES, Tolerances, load_config_file
from .spin import ModelParams
from .sweep import SweepSpec, parse_axis, run_sweep, write_csv, write_jsonl

console = Console()
err_console = Console(stderr=True)
log = logging.getLogger(__name__)

DEFAULTS = {
    "omega0": 1.0,
    "omega1": 0.5,
    "theta": math.pi / 6,
    "t": 4 * math.pi,
}


class UsageError(Exception):
    """Bad flag value; reported with exit code 2."""


# ── Argument handling ────────────────────────────────────────


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--omega0", type=float, default=None,
                        help=f"Quadrupole frequency omega0 > 0 (default: {DEFAULTS['omega0']})")
    common.add_argument("--omega1", type=float, default=None,
                        help=f"Field rotation frequency omega1 >= 0 (default: {DEFAULTS['omega1']})")
    angle = common.add_mutually_exclusive_group()
    angle.add_argument("--theta", type=float, default=None,
                       help="Field tilt in radians, 0 <= theta < pi/2 (default: pi/6)")
    angle.add_argument("--theta-deg", type=float, default=None,
                       help="Field tilt in degrees (converted to radians)")
    common.add_argument("--t", type=float, default=None,
                        help="Gate duration (default: 4 pi)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"Seed for every random draw (default: {DEFAULT_SEED})")
    common.add_argument("--tol", type=float, default=None,
                        help="Replace every residual bound with this value; computations keep the defaults")
    common.add_argument("--step-scale", type=float, default=DEFAULT_STEP_SCALE,
                        help=f"Integrator step bound h * (omega0 + 3 omega1) (default: {DEFAULT_STEP_SCALE})")
    common.add_argument("--config", type=str, default=None,
                        help="key = value file with flag defaults; flags win on conflict")
    common.add_argument("-v", "--verbose", action="store_true", default=False,
                        help="Debug logging on stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="hgate",
        description="Non-adiabatic holonomic gates for a spin-3/2 quadrupole in a rotating field.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gate = sub.add_parser("gate", parents=[common], help="Evaluate the closed-form gate")
    p_gate.add_argument("--factors", action="store_true", default=False,
                        help="Also print the geometric, dynamical and frame factors")
    p_gate.add_argument("--json", action="store_true", default=False, help="Emit JSON")
    p_gate.add_argument("--out", type=str, default=None, help="Write output to FILE")

    p_sweep = sub.add_parser("sweep", parents=[common], help="Evaluate a parameter grid")
    p_sweep.add_argument("--axis", action="append", default=[], metavar="NAME=START:STOP:COUNT[:linear|log]",
                         help="Swept parameter (repeatable; first axis varies slowest)")
    p_sweep.add_argument("--verify", action="store_true", default=False,
                         help="Integrate every point and report the fidelity")
    p_sweep.add_argument("--fields", type=str, default=None, help="Comma-separated output fields")
    p_sweep.add_argument("--json", action="store_true", default=False, help="Emit JSON lines instead of CSV")
    p_sweep.add_argument("--out", type=str, default=None, help="Write output to FILE")
    p_sweep.add_argument("--concurrency", type=int, default=DEFAULT_CONCURRENCY,
                         help=f"Worker processes (default: {DEFAULT_CONCURRENCY})")
    p_sweep.add_argument("--no-cache", action="store_true", default=False, help="Disable the oracle cache")
    p_sweep.add_argument("--clear-cache", action="store_true", default=False,
                         help="Delete cached integrations before sweeping")
    p_sweep.add_argument("--max-grid", type=int, default=GRID_CAP,
                         help=f"Largest accepted grid (default: {GRID_CAP})")

    p_verify = sub.add_parser("verify", parents=[common], help="Run the invariant suite")
    p_verify.add_argument("--json", action="store_true", default=False, help="Emit JSON")

    p_errata = sub.add_parser("errata", parents=[common], help="Printed-vs-derived reconciliation report")
    p_errata.add_argument("--json", action="store_true", default=False, help="Emit JSON")
    p_errata.add_argument("--out", type=str, default=None, help="Write output to FILE")

    p_adiabatic = sub.add_parser("adiabatic", parents=[common], help="Adiabatic connection and Wilson loop")
    p_adiabatic.add_argument("--loop-points", type=int, default=DEFAULT_LOOP_POINTS,
                             help=f"Points on the field loop (default: {DEFAULT_LOOP_POINTS})")
    p_adiabatic.add_argument("--json", action="store_true", default=False, help="Emit JSON")

    parser.subcommands = sub.choices
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Load --config values as defaults of every subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = load_config_file(known.config)
    if "theta" in values and "theta_deg" in values:
        raise ConfigError(f"{known.config}: set theta or theta_deg, not both")
    if "theta_deg" in values:
        values["theta"] = math.radians(values.pop("theta_deg"))
    config_theta = values.pop("theta", None)
    for subparser in parser.subcommands.values():
        subparser.set_defaults(config_theta=config_theta, **values)


def resolve_params(args) -> ModelParams:
    theta = args.theta
    if theta is None and args.theta_deg is not None:
        theta = math.radians(args.theta_deg)
    if theta is None:
        theta = getattr(args, "config_theta", None)
    if theta is None:
        theta = DEFAULTS["theta"]
    flag_of = {"omega0": "--omega0", "omega1": "--omega1",
               "theta": "--theta-deg" if args.theta_deg is not None else "--theta"}
    try:
        return ModelParams(
            omega0=_pick(args.omega0, "omega0"),
            omega1=_pick(args.omega1, "omega1"),
            theta=theta,
        ).require_field()
    except DomainError as exc:
        name = str(exc).split()[0]
        raise UsageError(f"{flag_of.get(name, '')}: {exc}".lstrip(": ")) from None


def _pick(value, name: str) -> float:
    return DEFAULTS[name] if value is None else value


def resolve_time(args) -> float:
    t = _pick(args.t, "t")
    if not (math.isfinite(t) and t >= 0):
        raise UsageError(f"--t: t must be finite and >= 0 (got {t})")
    return t


def resolve_tolerances(args) -> Tolerances:
    return DEFAULT_TOLERANCES.with_override(args.tol)


def resolve_integrator(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(step_scale=args.step_scale)
    except ConfigError as exc:
        raise UsageError(f"--step-scale: {exc}") from None


def size_consoles() -> None:
    """Terminals keep their own width; anything else gets PIPE_WIDTH columns."""
    for c in (console, err_console):
        c.width = None if c.is_terminal else PIPE_WIDTH


def setup_logging(verbose: bool) -> None:
    handler = RichHandler(console=err_console, show_path=False, show_time=False)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[handler],
        force=True,
    )


# ── Output helpers ───────────────────────────────────────────


def complex_pairs(m: np.ndarray) -> list:
    """[re, im] pairs, nested like ``m``."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _fmt(z: complex) -> str:
    return f"{z.real:+.6f}{z.imag:+.6f}j"


def matrix_table(title: str, m: np.ndarray) -> Table:
    table = Table(title=title, show_lines=False)
    table.add_column("", style="cyan")
    for label in BASIS_LABELS:
        table.add_column(label, justify="right", no_wrap=True, overflow="fold")
    for label, row in zip(BASIS_LABELS, np.asarray(m)):
        table.add_row(label, *(_fmt(z) for z in row))
    return table


def matrix_text(title: str, m: np.ndarray) -> str:
    lines = [title]
    for row in np.asarray(m):
        lines.append("  " + "  ".join(_fmt(z) for z in row))
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        err_console.print(f"[green]Saved to {out}[/green]")
    else:
        sys.stdout.write(text)


# ── Commands ─────────────────────────────────────────────────


def cmd_gate(args) -> int:
    p = resolve_params(args)
    t = resolve_time(args)
    g = gate(p, t)
    mixing = characterize_gate(g)
    factors = {"u_geometric": g.u_geometric, "u_dynamic": g.u_dynamic, "frame": g.frame}

    if args.json:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "params": p.to_dict(),
            "t": t,
            "u_gate": complex_pairs(g.u_gate),
            "energies": list(g.chain.energies),
            "participation": list(mixing.participation),
            "transfer_norm": mixing.transfer_norm,
        }
        if args.factors:
            doc.update({k: complex_pairs(v) for k, v in factors.items()})
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        return 0

    if args.out:
        text = matrix_text("u_gate", g.u_gate)
        if args.factors:
            text += "".join(matrix_text(k, v) for k, v in factors.items())
        _emit(text, args.out)
        return 0

    console.print(matrix_table(
        f"u_gate  omega0={p.omega0:g} omega1={p.omega1:g} theta={p.theta:.6f} t={t:g}", g.u_gate
    ))
    if args.factors:
        for name, m in factors.items():
            console.print(matrix_table(name, m))
    console.print(
        f"[dim]participation {list(mixing.participation)}, "
        f"3/2 <-> 1/2 transfer {mixing.transfer_norm:.6f}[/dim]"
    )
    return 0


def cmd_sweep(args) -> int:
    p = resolve_params(args)
    fixed = {"omega0": p.omega0, "omega1": p.omega1, "theta": p.theta, "t": resolve_time(args)}
    outputs = tuple(f.strip() for f in args.fields.split(",") if f.strip()) if args.fields else ()
    spec = SweepSpec(
        axes=tuple(parse_axis(a) for a in args.axis),
        fixed=fixed,
        outputs=outputs,
        max_grid=args.max_grid,
    )
    cfg = resolve_integrator(args)
    cache = OracleCache(enabled=args.verify and not args.no_cache)
    if args.clear_cache:
        cache.invalidate(NS_ORACLE)
        log.info("oracle cache cleared")

    with Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        console=err_console,
        transient=True,
    ) as progress:
        task = progress.add_task("Sweeping...", total=spec.grid_size)
        records = asyncio.run(run_sweep(
            spec,
            verify=args.verify,
            cfg=cfg,
            tol=resolve_tolerances(args),
            cache=cache,
            concurrency=args.concurrency,
            on_point_done=lambda _: progress.advance(task),
        ))

    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as f:
            (write_jsonl if args.json else write_csv)(records, spec.fields, f)
        err_console.print(f"[green]Saved {len(records)} rows to {args.out}[/green]")
    else:
        (write_jsonl if args.json else write_csv)(records, spec.fields, sys.stdout)

    flagged = sum(r.flagged for r in records)
    if flagged:
        err_console.print(f"[yellow]{flagged} of {len(records)} points flagged[/yellow]")
    if args.verify and cache.enabled:
        stats = cache.stats()
        log.debug("oracle cache: %d hits, %d misses", stats["hits"], stats["misses"])
    return 0


def cmd_verify(args) -> int:
    tol = resolve_tolerances(args)
    results = run_suite(
        seed=args.seed,
        tol=tol,
        cfg=resolve_integrator(args),
        on_group=lambda label: log.info("checking %s", label),
    )
    failed = [r for r in results if not r.passed]

    if args.json:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "seed": args.seed,
            "passed": not failed,
            "tolerances": tol.to_dict(),
            "checks": [r.to_dict() for r in results],
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        table = Table(title=f"hgate verify (seed {args.seed})", show_lines=False)
        table.add_column("Check", style="cyan", no_wrap=True, overflow="fold")
        table.add_column("Module")
        table.add_column("Worst", justify="right")
        table.add_column("Bound", justify="right")
        table.add_column("Result")
        for r in results:
            status = "[green]PASS[/green]" if r.passed else "[red]FAIL[/red]"
            table.add_row(r.name, r.module, f"{r.worst:.3e}", f"{r.direction} {r.bound:.1e}", status)
        console.print(table)
        if failed:
            console.print(f"\n[red]{len(failed)} of {len(results)} checks failed.[/red]")
        else:
            console.print(f"\n[green]All {len(results)} checks passed.[/green]")
    return 1 if failed else 0


def cmd_errata(args) -> int:
    report = build_report()
    text = json.dumps(report.to_dict(), indent=2) + "\n" if args.json else report.to_text()
    _emit(text, args.out)
    return 0


def cmd_adiabatic(args) -> int:
    p = resolve_params(args)
    if args.loop_points < 3:
        raise UsageError(f"--loop-points: need at least 3 (got {args.loop_points})")
    tol = resolve_tolerances(args)
    report = compare_adiabatic(p, loop_points=args.loop_points)

    if args.json:
        doc = {"schema_version": SCHEMA_VERSION, **report.to_dict(), "passed": report.passed(tol)}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return 0

    table = Table(title=f"Adiabatic connection  theta={p.theta:.6f}, {args.loop_points} loop points")
    table.add_column("Level", style="cyan")
    table.add_column("|A off-diag|", justify="right")
    table.add_column("Loop eigenvalues")
    table.add_column("Loop error", justify="right")
    table.add_column("Derived block spectrum")
    table.add_column("Adiabatic spectrum")
    for level in ("3/2", "1/2"):
        table.add_row(
            level,
            f"{report.wz_offdiag[level]:.6f}",
            ", ".join(_fmt(z) for z in report.loop_eigenvalues[level]),
            f"{report.loop_error[level]:.2e}",
            ", ".join(f"{x:+.6f}" for x in report.derived_block_spectrum[level]),
            ", ".join(f"{x:+.6f}" for x in report.adiabatic_block_spectrum[level]),
        )
    console.print(table)
    return 0


COMMANDS = {
    "gate": cmd_gate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "errata": cmd_errata,
    "adiabatic": cmd_adiabatic,
}


# ── CLI entry point ──────────────────────────────────────────


def main(argv: list[str] | None = None) -> int:
    """CLI entry point."""
    try:
        return _main_inner(sys.argv[1:] if argv is None else list(argv))
    except KeyboardInterrupt:
        err_console.print("\n[yellow]Cancelled.[/yellow]")
        return 130


def _main_inner(argv: list[str]) -> int:
    size_consoles()
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        err_console.print(f"[red]error: {exc}[/red]", soft_wrap=True)
        return 2

    setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, DomainError, GridTooLarge) as exc:
        err_console.print(f"[red]error: {exc}[/red]", soft_wrap=True)
        return 2
    except HgateError as exc:
        err_console.print(f"[red]{type(exc).__name__}: {exc}[/red]", soft_wrap=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
