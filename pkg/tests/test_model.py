import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seplind.model import (
    ModelError,
    ProductState,
    SystemModel,
    effective_hamiltonian,
    is_separable_generator,
    reduce_all,
)
from seplind.numerics import partial_inner
from seplind.scenarios import STATES, SWAP, build_bell_decay, build_swap

from conftest import random_hermitian, random_unit

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
SM = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
R2 = 1 / math.sqrt(2)


def bell_basis():
    return np.column_stack([STATES[k] for k in ("00", "phi+", "phi-", "11")])


# -- construction ------------------------------------------------------------

def test_model_rejects_non_hermitian():
    with pytest.raises(ModelError):
        SystemModel(2, 2, np.kron(SM, np.eye(2)))


def test_model_rejects_wrong_shape():
    with pytest.raises(ModelError):
        SystemModel(2, 2, np.eye(3))
    with pytest.raises(ModelError):
        SystemModel(2, 2, np.zeros((4, 4)), (np.eye(2),))


def test_model_arrays_read_only():
    m = build_swap(1.0)
    with pytest.raises(ValueError):
        m.hamiltonian[0, 0] = 1.0


def test_product_state_must_be_normalized():
    with pytest.raises(ModelError):
        ProductState([1, 1], [1, 0])
    s = ProductState.normalized([1, 1], [0, 2])
    assert np.allclose(s.vector, [0, R2, 0, R2])


# -- effective hamiltonian ---------------------------------------------------

def test_heff_single_qubit_decay():
    gamma = 0.7
    m = SystemModel(1, 2, np.zeros((2, 2)), (math.sqrt(gamma) * SM,))
    h = effective_hamiltonian(m)
    assert np.allclose(h, np.diag([0, -0.5j * gamma]), atol=1e-15)


def test_heff_bell_decay_diagonal_in_bell_basis():
    h = effective_hamiltonian(build_bell_decay((9, 1, 1, 9)))
    b = bell_basis()
    in_bell = b.conj().T @ h @ b
    assert np.allclose(in_bell, -0.5j * np.diag([0, 1, 9, 10]), atol=1e-14)


def test_heff_swap_is_scalar():
    assert np.allclose(effective_hamiltonian(build_swap(0.6)), -0.3j * np.eye(4), atol=1e-15)


def test_heff_is_hamiltonian_without_dissipators(rng):
    h = random_hermitian(rng, 4)
    assert np.array_equal(effective_hamiltonian(SystemModel(2, 2, h)), h)


def test_total_rate_bound():
    assert math.isclose(build_bell_decay((9, 1, 1, 9)).total_rate_bound(), 10.0, rel_tol=1e-12)
    assert math.isclose(build_swap(2.5).total_rate_bound(), 2.5, rel_tol=1e-12)


# -- reduced operators -------------------------------------------------------

def test_swap_reduced_operators(rng):
    a, b = random_unit(rng, 2), random_unit(rng, 2)
    red = reduce_all(build_swap(1.0), ProductState(a, b))
    assert np.allclose(red.lindblad_a[0], np.outer(b, b.conj()), atol=1e-14)
    assert np.allclose(red.lindblad_b[0], np.outer(a, a.conj()), atol=1e-14)
    assert math.isclose(red.expectation[0].real, abs(np.vdot(a, b)) ** 2, abs_tol=1e-14)
    assert math.isclose(red.rate[0], 1.0, abs_tol=1e-14)
    # V^dagger V = I reduces to the identity on both sides
    assert np.allclose(red.decay_a[0], np.eye(2), atol=1e-14)


def test_bell_reduced_jump_on_11():
    red = reduce_all(build_bell_decay((9, 1, 1, 9)), ProductState([0, 1], [0, 1]))
    assert np.allclose(red.lindblad_a[0], 3 * R2 * SM, atol=1e-14)
    assert np.allclose(red.lindblad_b[0], 3 * R2 * SM, atol=1e-14)
    assert np.allclose(red.rate, [9, 0, 1, 0], atol=1e-12)
    assert np.allclose(red.expectation, 0, atol=1e-15)


def test_reduction_is_homogeneous(rng):
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    phi = random_unit(rng, 2)
    for c in (2.0, -0.5, 1j, 3 - 4j):
        assert np.allclose(partial_inner(op, c * phi, "A"), partial_inner(op, phi, "A"), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rate_is_norm_of_jump(seed):
    rng = np.random.default_rng(seed)
    ops = tuple(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2))
    m = SystemModel(2, 2, random_hermitian(rng, 4), ops)
    s = ProductState(random_unit(rng, 2), random_unit(rng, 2))
    red = reduce_all(m, s)
    for k, op in enumerate(ops):
        assert math.isclose(red.rate[k], np.linalg.norm(op @ s.vector) ** 2, rel_tol=1e-12)
        # <L> agrees with either reduced operator sandwiched by the other factor
        via_a = np.vdot(s.psi_a, red.lindblad_a[k] @ s.psi_a)
        assert abs(via_a - red.expectation[k]) < 1e-12
        via_b = np.vdot(s.psi_b, red.lindblad_b[k] @ s.psi_b)
        assert abs(via_b - red.expectation[k]) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_product_jump_reduces_to_full_jump(seed):
    rng = np.random.default_rng(seed)
    a_op = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b_op = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = SystemModel(2, 3, np.zeros((6, 6)), (np.kron(a_op, b_op),))
    s = ProductState(random_unit(rng, 2), random_unit(rng, 3))
    red = reduce_all(m, s)
    v = np.kron(red.lindblad_a[0] @ s.psi_a, red.lindblad_b[0] @ s.psi_b)
    full = m.lindblads[0] @ s.vector
    v /= np.linalg.norm(v)
    full /= np.linalg.norm(full)
    assert abs(abs(np.vdot(v, full)) - 1) < 1e-10


# -- separability diagnostic -------------------------------------------------

def test_local_model_is_separable():
    h = np.kron(SZ, np.eye(2)) + 0.3 * np.kron(np.eye(2), SX)
    m = SystemModel(2, 2, h, (np.kron(SM, np.eye(2)), np.kron(np.eye(2), SM)))
    ok, report = is_separable_generator(m)
    assert ok and report == []


def test_product_dissipator_decay_locality():
    # L = sigma_- x sigma_z has local L^dagger L = |1><1| x I
    m = SystemModel(2, 2, np.zeros((4, 4)), (np.kron(SM, SZ),))
    assert is_separable_generator(m)[0]
    # L = sigma_- x sigma_-: L^dagger L = |11><11| is not local
    m = SystemModel(2, 2, np.zeros((4, 4)), (np.kron(SM, SM),))
    ok, report = is_separable_generator(m)
    assert not ok and any("effective hamiltonian" in r for r in report)


def test_interacting_hamiltonian_flagged():
    m = SystemModel(2, 2, np.kron(SZ, SZ))
    ok, report = is_separable_generator(m)
    assert not ok and "not local" in report[0]


def test_swap_and_bell_flagged():
    ok, report = is_separable_generator(build_swap(1.0))
    assert not ok and "rank 4" in report[0]
    ok, report = is_separable_generator(build_bell_decay())
    assert not ok and sum("rank 2" in r for r in report) == 4


def test_swap_operator_constant():
    assert np.array_equal(SWAP @ SWAP, np.eye(4))
    assert np.array_equal(SWAP @ np.kron([1, 0], [0, 1]), np.kron([0, 1], [1, 0]))
