import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomic_gate.diagonalize import diagonalize
from holonomic_gate.errors import DomainError
from holonomic_gate.holonomy import (
    BlockCoefficients,
    ConnectionSource,
    characterize_gate,
    connection_derived,
    connection_printed,
    gate,
    gate_composed,
    interval_propagator,
    lab_propagator,
    pauli_coefficients,
    per_period_transfer,
)
from holonomic_gate.linalg import (
    SIGMA_1,
    SIGMA_2,
    SIGMA_3,
    expm_i_hermitian,
    frobenius_norm,
    hermiticity_residual,
    off_diagonal_norm,
    unitarity_residual,
)
from holonomic_gate.spin import ModelParams, build_spin_ops, h_lab

params = st.builds(
    ModelParams,
    st.floats(0.2, 3.0),
    st.floats(0.0, 3.0),
    st.floats(0.0, 1.5),
)


def test_pauli_coefficients_roundtrip():
    block = 0.3 * np.eye(2) - 1.2 * SIGMA_3 + 0.7 * SIGMA_1 + 0.1 * SIGMA_2
    coeffs = pauli_coefficients(block)
    assert coeffs.as_tuple() == pytest.approx((0.3, -1.2, 0.7, 0.1))
    np.testing.assert_allclose(coeffs.matrix(), block, atol=1e-15)


def test_connection_at_zero_tilt(ops):
    chain = diagonalize(ModelParams(1.0, 0.5, 0.0), ops)
    form = connection_derived(chain, ops)
    assert form.source is ConnectionSource.DERIVED
    assert form.a32.as_tuple() == pytest.approx((0, 1.5, 0, 0), abs=1e-14)
    assert form.a12.as_tuple() == pytest.approx((0, 0.5, 0, 0), abs=1e-14)
    assert form.transfer_norm == pytest.approx(0.0, abs=1e-14)


def test_printed_matches_derived_at_zero_tilt(ops):
    chain = diagonalize(ModelParams(1.0, 1.0, 0.0), ops)
    printed = connection_printed(chain)
    derived = connection_derived(chain, ops)
    assert printed.source is ConnectionSource.PRINTED
    assert frobenius_norm(printed.a_full - derived.a_full) == pytest.approx(0.0, abs=1e-14)


def test_printed_differs_once_tilted(ops):
    chain = diagonalize(ModelParams(1.0, 1.0, math.pi / 4), ops)
    printed = connection_printed(chain)
    derived = connection_derived(chain, ops)
    assert frobenius_norm(printed.a_full - derived.a_full) > 1e-3
    assert hermiticity_residual(printed.a_full) < 1e-14


@settings(max_examples=60, deadline=None)
@given(params)
def test_connection_is_hermitian_traceless_with_spin_spectrum(p):
    ops = build_spin_ops()
    a = connection_derived(diagonalize(p, ops), ops).a_full
    assert hermiticity_residual(a) < 1e-12
    assert abs(np.trace(a)) < 1e-12
    np.testing.assert_allclose(np.linalg.eigvalsh(a), [-1.5, -0.5, 0.5, 1.5], atol=1e-10)


def test_gate_at_zero_time_is_identity(ops, generic_params):
    g = gate(generic_params, 0.0, ops)
    np.testing.assert_array_equal(g.u_gate, np.eye(4))
    np.testing.assert_allclose(g.u_geometric, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(g.u_dynamic, np.eye(4), atol=1e-15)


@pytest.mark.parametrize("t", [-1.0, float("inf"), float("nan")])
def test_gate_rejects_bad_time(ops, generic_params, t):
    with pytest.raises(DomainError):
        gate(generic_params, t, ops)


def test_static_field_gate_is_plain_exponential(ops):
    p = ModelParams(1.0, 0.0, 0.7)
    t = 3.0
    expected = scipy.linalg.expm(-1j * h_lab(0.0, p, ops) * t)
    np.testing.assert_allclose(gate(p, t, ops).u_gate, expected, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(params, st.floats(0.0, 30.0))
def test_gate_unitary_and_factorized(p, t):
    g = gate(p, t)
    for u in (g.u_gate, g.u_geometric, g.u_dynamic, g.frame):
        assert unitarity_residual(u) < 1e-11
    assert frobenius_norm(g.u_gate - g.factorized()) < 1e-9


def test_geometric_factor_group_law(ops, generic_params):
    g1 = gate(generic_params, 1.3, ops)
    g2 = gate(generic_params, 2.1, ops)
    g12 = gate(generic_params, 3.4, ops)
    np.testing.assert_allclose(g1.u_geometric @ g2.u_geometric, g12.u_geometric, atol=1e-12)
    a = g12.connection.a_full
    np.testing.assert_allclose(
        expm_i_hermitian(a, generic_params.omega1 * 3.4), g12.u_geometric, atol=1e-13
    )


@pytest.mark.parametrize("n", [1, 2, 10, 100])
def test_composed_intervals_match_closed_form(ops, generic_params, n):
    t = 4 * math.pi
    np.testing.assert_allclose(gate_composed(generic_params, t, n, ops), gate(generic_params, t, ops).u_gate, atol=1e-10)


def test_gate_composed_rejects_zero_intervals(generic_params):
    with pytest.raises(DomainError):
        gate_composed(generic_params, 1.0, 0)


@pytest.mark.parametrize("t", [0.5, 3.0, 40.0])
def test_zero_tilt_gate_is_diagonal(ops, t):
    assert off_diagonal_norm(gate(ModelParams(1.0, 0.8, 0.0), t, ops).u_gate) < 1e-12


def test_tilted_gate_creates_superposition(ops):
    report = characterize_gate(gate(ModelParams(1.0, 1.0, math.pi / 4), 2 * math.pi, ops))
    assert report.creates_superposition
    assert report.max_participation >= 2
    assert report.transfer_norm > 1e-3


def test_untilted_gate_is_not_mixing(ops):
    report = characterize_gate(gate(ModelParams(1.0, 1.0, 0.0), 2 * math.pi, ops))
    assert report.participation == (1, 1, 1, 1)
    assert report.transfer_norm < 1e-12
    assert not report.creates_superposition


def test_per_period_transfer_adiabatic_vs_fast(ops):
    slow = per_period_transfer(ModelParams(1.0, 1e-3, math.pi / 4), ops)
    fast = per_period_transfer(ModelParams(1.0, 1.0, math.pi / 4), ops)
    assert slow < 1e-2
    assert fast > 0.05


def test_per_period_transfer_needs_rotation():
    with pytest.raises(DomainError):
        per_period_transfer(ModelParams(1.0, 0.0, 0.3))


def test_block_coefficients_default_sigma2_zero():
    assert BlockCoefficients(1, 2, 3).d == 0j


def test_interval_propagators_compose(ops, generic_params):
    t1, t2 = 1.3, 3.1
    split = interval_propagator(generic_params, t1, t2, ops) @ interval_propagator(generic_params, 0.0, t1, ops)
    np.testing.assert_allclose(split, lab_propagator(generic_params, t2, ops), atol=1e-12)
