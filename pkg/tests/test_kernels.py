import numpy as np
import pytest

from seplind import _pykernels
from seplind.kernels import BACKEND, get_backend
from seplind.model import ProductState, SystemModel, effective_hamiltonian
from seplind.rng import TrajectoryStream
from seplind.scenarios import STATES, build_bell_decay, build_swap

from conftest import random_hermitian, random_unit

try:
    from seplind import _kernels
except ImportError:  # pure-Python install
    _kernels = None

needs_compiled = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")


def full_args(model, psi, n_steps=10, n_sub=5, dt=0.02, seed=0):
    k0 = np.ascontiguousarray(np.eye(model.dim) - 1j * dt * effective_hamiltonian(model))
    u = TrajectoryStream(seed, 0).uniforms(n_steps * n_sub)
    return k0, np.ascontiguousarray(model.lindblad_array), np.ascontiguousarray(psi), u, n_steps, n_sub, dt


def sep_args(model, state, n_steps=10, n_sub=5, dt=0.02, seed=0):
    heff = np.ascontiguousarray(effective_hamiltonian(model))
    u = TrajectoryStream(seed, 0).uniforms(n_steps * n_sub)
    return (heff, np.ascontiguousarray(model.lindblad_array), state.psi_a, state.psi_b,
            u, n_steps, n_sub, dt)


def random_model(rng):
    ops = tuple(0.7 * (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) for _ in range(2))
    return SystemModel(2, 2, random_hermitian(rng, 4), ops)


def test_backend_selection():
    assert BACKEND in ("compiled", "python")
    assert get_backend("python")[1] is _pykernels
    with pytest.raises(ValueError):
        get_backend("gpu")


def test_python_full_kernel_first_step():
    m = build_swap(1.0)
    psi = np.kron([1, 0], [0, 1]).astype(complex)
    u = np.array([0.005, 0.5])  # jump, then no jump
    states, jk, jm, status, _ = _pykernels.full_trajectory(
        np.eye(4, dtype=complex) - 0.01j * effective_hamiltonian(m),
        np.ascontiguousarray(m.lindblad_array), psi, u, 2, 1, 0.01)
    assert status == 0 and list(jk) == [0] and list(jm) == [0]
    assert np.allclose(states[1], np.kron([0, 1], [1, 0]))
    assert np.allclose(states[2], states[1])


@needs_compiled
@pytest.mark.parametrize("seed", range(5))
def test_full_kernels_agree(rng, seed):
    m = random_model(rng) if seed else build_bell_decay()
    psi = random_unit(rng, 4) if seed else STATES["11"]
    args = full_args(m, psi, seed=seed)
    a = _pykernels.full_trajectory(*args)
    b = _kernels.full_trajectory(*args)
    assert np.allclose(a[0], b[0], atol=1e-12)
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])
    assert a[3:] == b[3:]


@needs_compiled
@pytest.mark.parametrize("seed", range(5))
def test_separable_kernels_agree(rng, seed):
    m = random_model(rng) if seed else build_bell_decay()
    s = ProductState(random_unit(rng, 2), random_unit(rng, 2)) if seed else ProductState([0, 1], [0, 1])
    args = sep_args(m, s, seed=seed)
    a = _pykernels.separable_trajectory(*args)
    b = _kernels.separable_trajectory(*args)
    assert np.allclose(a[0], b[0], atol=1e-12) and np.allclose(a[1], b[1], atol=1e-12)
    assert np.array_equal(a[2], b[2]) and np.array_equal(a[3], b[3])
    assert a[4:] == b[4:]


@needs_compiled
def test_kernels_agree_on_undefined_jump():
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    m = SystemModel(2, 2, np.zeros((4, 4)), (np.kron(sx, sx) + np.kron(sy, sy),))
    s = ProductState([1, 0], [0, 1])
    args = sep_args(m, s, n_steps=5, n_sub=10, dt=0.02)
    a = _pykernels.separable_trajectory(*args)
    b = _kernels.separable_trajectory(*args)
    assert a[4] == b[4] == 2 and a[5] == b[5]


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_python_jacobi_sweeps_diagonalize(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = np.ascontiguousarray(x + x.conj().T)
    a, v = h.copy(), np.eye(n, dtype=complex)
    assert _pykernels.jacobi_sweeps(a, v, 1e-14 * np.linalg.norm(h), 64)
    assert np.max(np.abs(v @ a @ v.conj().T - h)) < 1e-12
    assert np.allclose(np.sort(np.diag(a).real), np.linalg.eigvalsh(h), atol=1e-12)


@needs_compiled
@pytest.mark.parametrize("n", [2, 3, 4, 8, 16])
def test_jacobi_kernels_agree(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = np.ascontiguousarray(x + x.conj().T)
    thr = 1e-14 * np.linalg.norm(h)
    a1, v1 = h.copy(), np.eye(n, dtype=complex)
    a2, v2 = h.copy(), np.eye(n, dtype=complex)
    assert _pykernels.jacobi_sweeps(a1, v1, thr, 64)
    assert _kernels.jacobi_sweeps(a2, v2, thr, 64)
    assert np.allclose(a1, a2, atol=1e-12) and np.allclose(v1, v2, atol=1e-12)


def test_jacobi_reports_non_convergence():
    h = np.array([[1, 2], [2, -1]], dtype=complex)
    assert not _pykernels.jacobi_sweeps(h.copy(), np.eye(2, dtype=complex), 0.0, 0)
