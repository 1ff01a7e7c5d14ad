"""Bipartite open-system models, product states and reduced operators."""
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    DimensionError,
    hermitian_eigenvalues,
    operator_schmidt_rank,
    partial_inner,
    partial_trace,
    tensor_product,
)

__all__ = [
    "ModelError",
    "SystemModel",
    "ProductState",
    "ReducedOperatorSet",
    "effective_hamiltonian",
    "reduce_all",
    "is_separable_generator",
]

NORM_TOL = 1e-12


class ModelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Hamiltonian and Lindblad operators on C^dim_a (x) C^dim_b.

    Rates are absorbed into the Lindblad operators as sqrt(gamma) prefactors.
    """

    dim_a: int
    dim_b: int
    hamiltonian: np.ndarray
    lindblads: tuple = ()
    label: str = "custom"

    def __post_init__(self):
        d = self.dim_a * self.dim_b
        if self.dim_a < 1 or self.dim_b < 1:
            raise ModelError("subsystem dimensions must be positive")
        h = np.array(self.hamiltonian, dtype=np.complex128)
        if h.shape != (d, d):
            raise ModelError(f"hamiltonian must be {d}x{d}, got {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ModelError("hamiltonian has non-finite entries")
        if np.max(np.abs(h - h.conj().T)) > 1e-10:
            raise ModelError("hamiltonian is not Hermitian within 1e-10")
        ls = []
        for m, op in enumerate(self.lindblads):
            op = np.array(op, dtype=np.complex128)
            if op.shape != (d, d):
                raise ModelError(f"lindblad[{m}] must be {d}x{d}, got {op.shape}")
            if not np.all(np.isfinite(op)):
                raise ModelError(f"lindblad[{m}] has non-finite entries")
            op.setflags(write=False)
            ls.append(op)
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblads", tuple(ls))

    @property
    def dims(self):
        return (self.dim_a, self.dim_b)

    @property
    def dim(self):
        return self.dim_a * self.dim_b

    @property
    def lindblad_array(self):
        if not self.lindblads:
            return np.zeros((0, self.dim, self.dim), dtype=np.complex128)
        return np.stack(self.lindblads)

    def decay_operator(self):
        """Sum of L^dagger L over all channels."""
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for op in self.lindblads:
            out += op.conj().T @ op
        return out

    def total_rate_bound(self):
        """Operator norm of the summed decay operator (largest jump rate)."""
        if not self.lindblads:
            return 0.0
        return max(float(hermitian_eigenvalues(self.decay_operator())[-1]), 0.0)


@dataclass(frozen=True, eq=False)
class ProductState:
    psi_a: np.ndarray
    psi_b: np.ndarray

    def __post_init__(self):
        for name in ("psi_a", "psi_b"):
            v = np.array(getattr(self, name), dtype=np.complex128).ravel()
            if v.size == 0 or not np.all(np.isfinite(v)):
                raise ModelError(f"{name} must be a finite nonempty vector")
            n = np.linalg.norm(v)
            if abs(n - 1.0) > NORM_TOL:
                raise ModelError(f"{name} is not normalized (norm {n!r})")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def normalized(cls, psi_a, psi_b):
        a = np.asarray(psi_a, dtype=np.complex128).ravel()
        b = np.asarray(psi_b, dtype=np.complex128).ravel()
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0.0 or nb == 0.0:
            raise ModelError("cannot normalize a zero vector")
        return cls(a / na, b / nb)

    @property
    def dims(self):
        return (self.psi_a.size, self.psi_b.size)

    @property
    def vector(self):
        return tensor_product(self.psi_a, self.psi_b)

    def density(self):
        v = self.vector
        return np.outer(v, v.conj())

    def swapped(self):
        return ProductState(self.psi_b, self.psi_a)


@dataclass(frozen=True)
class ReducedOperatorSet:
    """State-dependent reduced operators for one product state.

    Index m of each list matches the model's Lindblad operator m.
    """

    hamiltonian_a: np.ndarray
    hamiltonian_b: np.ndarray
    lindblad_a: list
    lindblad_b: list
    decay_a: list
    decay_b: list
    expectation: np.ndarray
    rate: np.ndarray = field(repr=False)

    @property
    def total_rate(self):
        return float(np.sum(self.rate))

    def decay_sum(self):
        d_a = self.hamiltonian_a.shape[0]
        d_b = self.hamiltonian_b.shape[0]
        sa = sum(self.decay_a, np.zeros((d_a, d_a), dtype=np.complex128))
        sb = sum(self.decay_b, np.zeros((d_b, d_b), dtype=np.complex128))
        return sa, sb


def effective_hamiltonian(model):
    """Non-Hermitian no-jump generator H - (i/2) sum_m L^dagger L."""
    return model.hamiltonian - 0.5j * model.decay_operator()


def _check_state(model, state):
    if state.dims != model.dims:
        raise DimensionError(f"state dims {state.dims} do not match model dims {model.dims}")


def reduce_all(model, state):
    _check_state(model, state)
    psi = state.vector
    a, b = state.psi_a, state.psi_b
    la, lb, da, db = [], [], [], []
    expect = np.zeros(len(model.lindblads), dtype=np.complex128)
    rate = np.zeros(len(model.lindblads))
    for m, op in enumerate(model.lindblads):
        dec = op.conj().T @ op
        la.append(partial_inner(op, b, "A"))
        lb.append(partial_inner(op, a, "B"))
        da.append(partial_inner(dec, b, "A"))
        db.append(partial_inner(dec, a, "B"))
        expect[m] = np.vdot(psi, op @ psi)
        v = op @ psi
        r = float(np.vdot(v, v).real)
        rate[m] = r if r > -NORM_TOL else 0.0
    rate = np.clip(rate, 0.0, None)
    return ReducedOperatorSet(
        hamiltonian_a=partial_inner(model.hamiltonian, b, "A"),
        hamiltonian_b=partial_inner(model.hamiltonian, a, "B"),
        lindblad_a=la,
        lindblad_b=lb,
        decay_a=da,
        decay_b=db,
        expectation=expect,
        rate=rate,
    )


def _locality_residual(op, dims, reference=None):
    """Norm of op - (op)_A x I - I x (op)_B + <op> I.

    Without a reference state the contraction is against the maximally mixed
    state; the residual then vanishes iff op = X (x) I + I (x) Y.
    """
    d_a, d_b = dims
    if reference is None:
        op_a = partial_trace(op, dims, keep="A") / d_b
        op_b = partial_trace(op, dims, keep="B") / d_a
        mean = np.trace(op) / (d_a * d_b)
    else:
        op_a = partial_inner(op, reference.psi_b, "A")
        op_b = partial_inner(op, reference.psi_a, "B")
        psi = reference.vector
        mean = np.vdot(psi, op @ psi)
    res = (
        op
        - tensor_product(op_a, np.eye(d_b))
        - tensor_product(np.eye(d_a), op_b)
        + mean * np.eye(d_a * d_b)
    )
    return float(np.max(np.abs(res))) if res.size else 0.0


def _reference_state(dims):
    rng = np.random.default_rng(20240611)
    a = rng.normal(size=dims[0]) + 1j * rng.normal(size=dims[0])
    b = rng.normal(size=dims[1]) + 1j * rng.normal(size=dims[1])
    return ProductState.normalized(a, b)


def is_separable_generator(model, tol=1e-7, reference=None):
    """Check that every L^m is a product operator and H_eff is local.

    Returns ``(ok, report)`` where ``report`` lists the offending pieces.
    """
    report = []
    for m, op in enumerate(model.lindblads):
        rank = operator_schmidt_rank(op, model.dims, tol=tol)
        if rank > 1:
            report.append(f"lindblad[{m}] has operator Schmidt rank {rank}")
    heff = effective_hamiltonian(model)
    scale = max(1.0, float(np.max(np.abs(heff))) if heff.size else 1.0)
    if reference is None:
        reference = _reference_state(model.dims)
    for name, ref in (("maximally mixed", None), ("reference state", reference)):
        r = _locality_residual(heff, model.dims, ref)
        if r > tol * scale:
            report.append(f"effective hamiltonian not local ({name} residual {r:.3g})")
    return (not report, report)
