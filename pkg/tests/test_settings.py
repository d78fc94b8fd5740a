import json

import pytest

from holonomic_gate.errors import ConfigError
from holonomic_gate.settings import DEFAULT_TOLERANCES, Tolerances, load_config_file


def test_override_replaces_residual_tolerances():
    tol = DEFAULT_TOLERANCES.with_override(1e-3)
    assert tol.output_check == 1e-3
    assert tol.fidelity == 1e-3
    assert tol.wilson_loop == 1e-3
    assert tol.transfer_floor == DEFAULT_TOLERANCES.transfer_floor


def test_override_none_is_identity():
    assert DEFAULT_TOLERANCES.with_override(None) is DEFAULT_TOLERANCES


@pytest.mark.parametrize("bad", [-1.0, float("nan")])
def test_override_rejects_negative(bad):
    with pytest.raises(ConfigError):
        DEFAULT_TOLERANCES.with_override(bad)


def test_tolerances_to_dict():
    doc = Tolerances().to_dict()
    assert doc["fidelity"] == 1e-6
    assert json.loads(json.dumps(doc)) == doc


def test_load_config_file(tmp_path):
    path = tmp_path / "hgate.conf"
    path.write_text(
        "# gate defaults\n"
        "omega0 = 2.0\n"
        "\n"
        "theta-deg = 30   # tilt\n"
        "seed = 11\n"
    )
    assert load_config_file(path) == {"omega0": 2.0, "theta_deg": 30.0, "seed": 11}


@pytest.mark.parametrize(
    "content, fragment",
    [
        ("omega0 2.0\n", ":1: expected 'key = value'"),
        ("\nphase = 1\n", ":2: unknown key 'phase'"),
        ("seed = 1.5\n", "seed expects int"),
    ],
)
def test_load_config_file_errors(tmp_path, content, fragment):
    path = tmp_path / "bad.conf"
    path.write_text(content)
    with pytest.raises(ConfigError, match=fragment):
        load_config_file(path)


def test_load_config_file_missing(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config_file(tmp_path / "nope.conf")
