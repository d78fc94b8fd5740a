import json
import math

import pytest

from holonomic_gate.errata import DELTA_GRID, ERRATA, build_report, delta_row
from holonomic_gate.spin import ModelParams


@pytest.fixture(scope="module")
def report():
    return build_report()


def test_exactly_five_discrepancies(report):
    assert [e.key for e in report.errata] == [
        "j2-hermiticity",
        "lab-exponent-order",
        "rotating-sin-theta",
        "block-rotation-generator",
        "stray-dphi",
    ]
    assert all(e.anchor and e.printed and e.used and e.resolution for e in ERRATA)


def test_delta_grid():
    assert len(DELTA_GRID) == 8
    assert {p.omega0 for p in DELTA_GRID} == {1.0}
    assert {p.omega1 for p in DELTA_GRID} == {0.5, 1.0}


def test_zero_tilt_row_agrees():
    row = delta_row(ModelParams(1.0, 0.5, 0.0))
    assert row.printed["a32"][2] == 0.0
    assert row.printed["a12"][2] == 0.0
    assert row.derived["a32"] == pytest.approx([0.0, 1.5, 0.0], abs=1e-14)
    assert row.derived["a12"] == pytest.approx([0.0, 0.5, 0.0], abs=1e-14)
    for blk in ("a32", "a12"):
        assert row.delta[blk] == pytest.approx([0.0, 0.0, 0.0], abs=1e-14)
    assert row.full_delta == pytest.approx(0.0, abs=1e-14)


def test_generic_row_is_populated():
    row = delta_row(ModelParams(1.0, 1.0, math.pi / 4))
    assert len(row.delta["a32"]) == 3
    assert row.chain_residual > 0
    assert math.isfinite(row.full_delta)


def test_text_report_is_deterministic(report):
    text = report.to_text()
    assert text == build_report().to_text()
    assert text.count("[") >= 5
    for e in ERRATA:
        assert f"[{e.key}]" in text
        assert e.anchor in text
    assert text.endswith("\n")


def test_json_report(report):
    doc = report.to_dict()
    assert doc["schema_version"] == 1
    assert len(doc["errata"]) == 5
    assert len(doc["delta_table"]) == len(DELTA_GRID)
    assert set(doc["delta_table"][0]) >= {"omega0", "omega1", "theta", "printed", "derived", "delta"}
    assert json.dumps(doc, indent=2) == json.dumps(build_report().to_dict(), indent=2)
