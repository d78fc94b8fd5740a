import asyncio
import io
import json
import math

import pytest

from holonomic_gate.cache import OracleCache
from holonomic_gate.errors import ConfigError, GridTooLarge
from holonomic_gate.oracle import IntegratorConfig
from holonomic_gate.sweep import (
    ALL_FIELDS,
    DEFAULT_FIELDS,
    RunRecord,
    SweepAxis,
    SweepSpec,
    evaluate_point,
    parse_axis,
    run_sweep,
    write_csv,
    write_jsonl,
)

FIXED = {"omega0": 1.0, "omega1": 0.5, "theta": math.pi / 6, "t": 2.0}


def test_parse_axis():
    axis = parse_axis("theta=0:1.4:15")
    assert axis == SweepAxis("theta", 0.0, 1.4, 15, "linear")
    assert axis.values()[0] == 0.0
    assert axis.values()[-1] == pytest.approx(1.4)
    assert len(axis.values()) == 15

    log_axis = parse_axis("omega1=0.01:1:3:log")
    assert log_axis.values() == pytest.approx([0.01, 0.1, 1.0])


@pytest.mark.parametrize(
    "text",
    ["theta", "theta=0:1", "theta=a:1:3", "phi=0:1:3", "theta=0:1:0", "omega1=0:1:3:log", "t=0:1:3:cubic"],
)
def test_parse_axis_rejects(text):
    with pytest.raises(ConfigError):
        parse_axis(text)


def test_single_count_axis_uses_start():
    assert SweepAxis("t", 2.0, 5.0, 1).values() == [2.0]


def test_grid_order_first_axis_slowest():
    spec = SweepSpec(
        axes=(parse_axis("omega1=0.5:1:2"), parse_axis("theta=0:0.2:3")),
        fixed={"omega0": 1.0, "t": 1.0},
    )
    pts = list(spec.points())
    assert spec.grid_size == 6
    assert [(p["omega1"], p["theta"]) for p in pts] == [
        (0.5, 0.0), (0.5, 0.1), (0.5, 0.2), (1.0, 0.0), (1.0, 0.1), (1.0, 0.2),
    ]
    assert all(p["omega0"] == 1.0 and p["t"] == 1.0 for p in pts)


def test_no_axes_gives_single_point():
    spec = SweepSpec(axes=(), fixed=FIXED)
    assert spec.grid_size == 1
    assert list(spec.points()) == [FIXED]


def test_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(axes=(parse_axis("t=0:1:2"), parse_axis("t=1:2:2")), fixed=FIXED)
    with pytest.raises(ConfigError):
        SweepSpec(axes=(), fixed={"omega0": 1.0})
    with pytest.raises(ConfigError):
        SweepSpec(axes=(), fixed=FIXED, outputs=("fidelity", "bogus"))
    with pytest.raises(GridTooLarge):
        SweepSpec(axes=(parse_axis("t=0:1:11"),), fixed=FIXED, max_grid=10)


def test_fields_default_and_explicit():
    assert SweepSpec(axes=(), fixed=FIXED).fields == DEFAULT_FIELDS
    assert SweepSpec(axes=(), fixed=FIXED, outputs=("theta", "steps")).fields == ("theta", "steps")
    assert set(DEFAULT_FIELDS) < set(ALL_FIELDS)


def test_evaluate_point_without_oracle():
    record, propagation = evaluate_point(FIXED)
    assert propagation is None
    assert not record.flagged
    assert record.error == ""
    assert len(record.h_d) == 4
    assert record.a32 is not None and record.a12 is not None
    assert record.fidelity is None
    assert record.wall_time >= 0


def test_evaluate_point_with_oracle():
    record, propagation = evaluate_point(FIXED, verify=True, cfg=IntegratorConfig())
    assert propagation is not None
    assert record.fidelity >= 1 - 1e-6
    assert record.steps == propagation.steps_taken
    assert not record.flagged


def test_evaluate_point_flags_domain_errors():
    record, _ = evaluate_point({**FIXED, "theta": 2.0})
    assert record.flagged
    assert record.error.startswith("DomainError: theta")
    assert record.h_d is None


def test_evaluate_point_flags_failed_integration():
    record, _ = evaluate_point({**FIXED, "t": 50.0}, verify=True, cfg=IntegratorConfig(max_steps=10))
    assert record.flagged
    assert record.error.startswith("StepBudgetExceeded")
    assert record.h_d is not None


def test_theta_sweep_rows_in_order():
    spec = SweepSpec(
        axes=(parse_axis("theta=0:1.4:15"),),
        fixed={"omega0": 1.0, "omega1": 0.5, "t": 4 * math.pi},
    )
    seen = []
    records = asyncio.run(run_sweep(spec, concurrency=2, on_point_done=seen.append))
    assert len(records) == 15
    assert len(seen) == 15
    assert [r.theta for r in records] == pytest.approx([i * 0.1 for i in range(15)])
    assert not any(r.flagged for r in records)


def test_sweep_draws_points_lazily(monkeypatch):
    spec = SweepSpec(axes=(parse_axis("theta=0:1.4:12"),), fixed={"omega0": 1.0, "omega1": 0.5, "t": 2.0})
    drawn = []
    grid = SweepSpec.points

    def counting(self):
        for point in grid(self):
            drawn.append(point)
            yield point

    monkeypatch.setattr(SweepSpec, "points", counting)
    at_completion = []
    records = asyncio.run(run_sweep(spec, concurrency=2, on_point_done=lambda _: at_completion.append(len(drawn))))
    assert len(records) == 12
    assert at_completion[0] <= 3
    assert [r.theta for r in records] == pytest.approx([1.4 * i / 11 for i in range(12)])


def test_sweep_with_oracle_fills_cache(tmp_path):
    spec = SweepSpec(axes=(parse_axis("t=1:2:2"),), fixed={k: FIXED[k] for k in ("omega0", "omega1", "theta")})
    cache = OracleCache(base_dir=tmp_path)
    first = asyncio.run(run_sweep(spec, verify=True, cache=cache, concurrency=1))
    assert cache.stats()["entries"] == 2
    second = asyncio.run(run_sweep(spec, verify=True, cache=cache, concurrency=1))
    assert cache.stats()["hits"] == 2
    assert [r.fidelity for r in first] == [r.fidelity for r in second]


def test_run_sweep_rejects_zero_concurrency():
    with pytest.raises(ConfigError):
        asyncio.run(run_sweep(SweepSpec(axes=(), fixed=FIXED), concurrency=0))


def _records():
    spec = SweepSpec(axes=(parse_axis("omega1=0:1:3"),), fixed={"omega0": 1.0, "theta": 0.3, "t": 1.0})
    return [evaluate_point(p)[0] for p in spec.points()]


def test_csv_output_is_deterministic():
    fields = ("omega1", "theta", "h_d_0", "fidelity", "flagged", "error")
    outputs = []
    for _ in range(2):
        buf = io.StringIO()
        write_csv(_records(), fields, buf)
        outputs.append(buf.getvalue())
    assert outputs[0] == outputs[1]
    lines = outputs[0].splitlines()
    assert lines[0] == "omega1,theta,h_d_0,fidelity,flagged,error"
    assert len(lines) == 4
    assert lines[1].startswith("0.0,0.3,")
    assert lines[1].endswith(",,false,")


def test_jsonl_rows_carry_schema_version():
    buf = io.StringIO()
    write_jsonl(_records(), ("omega1", "a_tr_norm"), buf)
    rows = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert len(rows) == 3
    assert list(rows[0]) == ["schema_version", "omega1", "a_tr_norm"]
    assert rows[0]["schema_version"] == 1
    assert [r["omega1"] for r in rows] == [0.0, 0.5, 1.0]


def test_flat_record_has_every_field():
    flat = RunRecord(omega0=1.0, omega1=0.5, theta=0.1, t=1.0).flat()
    assert set(ALL_FIELDS) <= set(flat)
    assert flat["h_d_0"] is None
    assert flat["flagged"] is False
