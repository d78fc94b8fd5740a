import math

import numpy as np
import pytest

from holonomic_gate.errors import DomainError
from holonomic_gate.linalg import commutator, frobenius_norm, hermitian_eig
from holonomic_gate.spin import (
    ModelParams,
    field_rotation,
    h0,
    h_lab,
    h_lab_series,
    h_rot,
    lab_rotation,
    rotating_frame,
    tilted_generator,
)


def test_j3_is_exact_diagonal(ops):
    np.testing.assert_array_equal(ops.j3, np.diag([1.5, -1.5, 0.5, -0.5]))


def test_j1_entries(ops):
    expected = np.zeros((4, 4))
    expected[0, 2] = expected[2, 0] = math.sqrt(3) / 2
    expected[1, 3] = expected[3, 1] = math.sqrt(3) / 2
    expected[2, 3] = expected[3, 2] = 1.0
    np.testing.assert_allclose(ops.j1, expected, atol=1e-15)


def test_operators_are_hermitian(ops):
    for j in (ops.j1, ops.j2, ops.j3):
        np.testing.assert_array_equal(j, j.conj().T)


def test_su2_algebra_and_casimir(ops):
    j = (ops.j1, ops.j2, ops.j3)
    for i in range(3):
        residual = commutator(j[i], j[(i + 1) % 3]) - 1j * j[(i + 2) % 3]
        assert frobenius_norm(residual) < 1e-14
    casimir = sum(m @ m for m in j)
    assert frobenius_norm(casimir - 3.75 * np.eye(4)) < 1e-14


def test_h0_values(ops):
    np.testing.assert_allclose(h0(ModelParams(1.0, 0.0, 0.0), ops), np.diag([1, 1, -1, -1]), atol=1e-15)
    np.testing.assert_array_equal(h0(ModelParams(0.0, 0.0, 0.0), ops), np.zeros((4, 4)))
    assert np.trace(h0(ModelParams(2.7, 0.0, 0.0), ops)) == pytest.approx(0.0, abs=1e-14)


def test_h_lab_at_zero_tilt_equals_h0(ops):
    p = ModelParams(1.3, 0.8, 0.0)
    for t in (0.0, 1.0, 17.0):
        np.testing.assert_allclose(h_lab(t, p, ops), h0(p, ops), atol=1e-15)


def test_h_lab_isospectral_and_periodic(ops, rng):
    for _ in range(20):
        p = ModelParams(float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 5)), float(rng.uniform(0, 1.5)))
        t = float(rng.uniform(0, 10))
        vals, _ = hermitian_eig(h_lab(t, p, ops))
        np.testing.assert_allclose(vals, p.omega0 * np.array([-1, -1, 1, 1]), atol=1e-12 * p.omega0)
        period = 2 * math.pi / p.omega1
        np.testing.assert_allclose(h_lab(0.0, p, ops), h_lab(period, p, ops), atol=1e-12)


def test_h_lab_is_rotated_h0(ops, rng):
    for _ in range(100):
        p = ModelParams(float(rng.uniform(0.1, 10)), float(rng.uniform(0, 10)), float(rng.uniform(0, 1.4)))
        t = float(rng.uniform(0, 20))
        r = lab_rotation(t, p, ops)
        assert frobenius_norm(r @ h0(p, ops) @ r.conj().T - h_lab(t, p, ops)) < 1e-12 * p.omega0


def test_h_lab_series_matches_pointwise(ops):
    p = ModelParams(1.0, 0.7, 0.9)
    times = np.linspace(0, 12, 7)
    series = h_lab_series(times, p, ops)
    assert series.shape == (7, 4, 4)
    for t, h in zip(times, series):
        np.testing.assert_allclose(h, h_lab(float(t), p, ops), atol=1e-13)


def test_h_rot_at_zero_tilt(ops):
    h = h_rot(ModelParams(1.0, 0.4, 0.0), ops)
    np.testing.assert_allclose(h, np.diag([0.4, 1.6, -1.2, -0.8]), atol=1e-15)


def test_h_rot_without_rotation_is_h0(ops):
    p = ModelParams(1.5, 0.0, 0.7)
    np.testing.assert_allclose(h_rot(p, ops), h0(p, ops), atol=1e-14)


def test_h_rot_block_structure(ops):
    p = ModelParams(1.0, 0.8, 0.6)
    h = h_rot(p, ops)
    c, s = math.cos(p.theta), math.sin(p.theta)
    np.testing.assert_allclose(np.diag(h).real, [1 - 1.2 * c, 1 + 1.2 * c, -1 - 0.4 * c, -1 + 0.4 * c], atol=1e-14)
    assert h[2, 3] == pytest.approx(0.8 * s, abs=1e-14)
    assert h[3, 2] == pytest.approx(0.8 * s, abs=1e-14)
    xi = 0.8 * math.sqrt(3) / 2 * s
    np.testing.assert_allclose(h[:2, 2:], xi * np.eye(2), atol=1e-14)
    np.testing.assert_allclose(h[:2, :2], np.diag([1 - 1.2 * c, 1 + 1.2 * c]), atol=1e-14)


def test_tilted_generator_closed_form(ops):
    p = ModelParams(1.0, 1.0, 0.8)
    expected = math.cos(p.theta) * ops.j3 - math.sin(p.theta) * ops.j1
    np.testing.assert_allclose(tilted_generator(p, ops), expected, atol=1e-14)


def test_field_rotation_tilts_z_onto_field(ops):
    p = ModelParams(1.0, 1.0, 0.8)
    v = field_rotation(p, ops)
    expected = math.cos(p.theta) * ops.j3 + math.sin(p.theta) * ops.j1
    np.testing.assert_allclose(v @ ops.j3 @ v.conj().T, expected, atol=1e-14)


def test_rotating_frame_is_diagonal_phase(ops):
    u = rotating_frame(2.0, ModelParams(1.0, 0.5, 0.3), ops)
    np.testing.assert_allclose(u, np.diag(np.exp(-1j * np.array([1.5, -1.5, 0.5, -0.5]))), atol=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"omega0": -1.0, "omega1": 0.5, "theta": 0.3},
        {"omega0": 1.0, "omega1": -0.5, "theta": 0.3},
        {"omega0": 1.0, "omega1": 0.5, "theta": 1.5707963},
        {"omega0": 1.0, "omega1": 0.5, "theta": -0.1},
        {"omega0": float("nan"), "omega1": 0.5, "theta": 0.3},
        {"omega0": 1.0, "omega1": float("inf"), "theta": 0.3},
    ],
)
def test_model_params_validation(kwargs):
    with pytest.raises(DomainError):
        ModelParams(**kwargs)


def test_require_field():
    assert ModelParams(0.0, 1.0, 0.1).omega0 == 0.0
    with pytest.raises(DomainError, match="omega0"):
        ModelParams(0.0, 1.0, 0.1).require_field()


def test_alpha_property():
    assert ModelParams(1.0, 1.0, math.pi / 4).alpha == pytest.approx(math.atan(2))
