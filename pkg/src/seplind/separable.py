"""Separability-restricted dynamics.

Trajectories are kept as product states |psi_A>|psi_B>.  Every step uses
operators reduced against the current state, so the generator is nonlinear
and must be rebuilt after each substep.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .full import substeps_per_step
from .model import ProductState, SystemModel, effective_hamiltonian, reduce_all
from .numerics import tensor_product

__all__ = [
    "UndefinedJumpError",
    "ProductBranch",
    "ProductTrajectoryRecord",
    "separable_kraus_step",
    "mcwf_trajectory_separable",
    "swap_restricted_closed_form",
    "swap_restricted_weights",
    "separable_generator_rhs",
    "generator_consistency_check",
]

WEIGHT_TOL = 1e-12
JUMP_NORM_TOL = 1e-12
EXPECTATION_TOL = 1e-12


class UndefinedJumpError(ArithmeticError):
    """A jump with nonzero rate whose reduced product state vanishes."""


@dataclass(frozen=True)
class ProductBranch:
    channel: int
    weight: float
    state: ProductState


@dataclass
class ProductTrajectoryRecord:
    times: np.ndarray
    states_a: np.ndarray
    states_b: np.ndarray
    jump_log: list = field(default_factory=list)
    aborted: tuple = None

    @property
    def states(self):
        return [ProductState(a, b) for a, b in zip(self.states_a, self.states_b)]

    def composite(self):
        """Composite state vectors, shape (n_times, d_A * d_B)."""
        return np.einsum("ti,tk->tik", self.states_a, self.states_b).reshape(
            len(self.states_a), -1
        )


def _normalize(v):
    n = np.linalg.norm(v)
    return v / n, n


def separable_kraus_step(model, state, tau):
    """One step of the separable Kraus map.

    Branch 0 applies the reduced no-jump operators to each factor and carries
    the weight of the normalized product update.  Jump branches carry the
    Poisson weight tau <L^dagger L> and the normalized reduced jump factors.
    """
    red = reduce_all(model, state)
    d_a, d_b = model.dims
    dec_a, dec_b = red.decay_sum()
    k0_a = np.eye(d_a) - 1j * tau * red.hamiltonian_a - 0.5 * tau * dec_a
    k0_b = np.eye(d_b) - 1j * tau * red.hamiltonian_b - 0.5 * tau * dec_b
    psi = state.vector
    k0_mean = 1.0 - 1j * tau * np.vdot(psi, effective_hamiltonian(model) @ psi)
    a0, na = _normalize(k0_a @ state.psi_a)
    b0, nb = _normalize(k0_b @ state.psi_b)
    branches = [ProductBranch(0, float((na * nb) ** 2 / abs(k0_mean) ** 2), ProductState(a0, b0))]

    for m in range(len(model.lindblads)):
        weight = tau * float(red.rate[m])
        va = red.lindblad_a[m] @ state.psi_a
        vb = red.lindblad_b[m] @ state.psi_b
        na, nb = np.linalg.norm(va), np.linalg.norm(vb)
        if na * nb < JUMP_NORM_TOL:
            if weight > WEIGHT_TOL:
                raise UndefinedJumpError(
                    f"channel {m + 1}: rate {red.rate[m]:.3g} but reduced jump state vanishes"
                )
            branches.append(ProductBranch(m + 1, weight, None))
            continue
        branches.append(ProductBranch(m + 1, weight, ProductState(va / na, vb / nb)))
    return branches


def mcwf_trajectory_separable(model, psi0, config, rng_stream):
    """One restricted quantum-jump trajectory.

    Uses the same substep contract and random stream layout as
    :func:`seplind.full.mcwf_trajectory_full`.  An undefined post-jump state
    does not raise; the record is returned with ``aborted = (time, reason)``.
    """
    n_sub = substeps_per_step(model, config)
    dt = config.tau / n_sub
    heff = np.ascontiguousarray(effective_hamiltonian(model))
    u = rng_stream.uniforms(config.n_steps * n_sub)
    sa, sb, jk, jm, status, fail = kernels.separable_trajectory(
        heff,
        np.ascontiguousarray(model.lindblad_array),
        np.ascontiguousarray(psi0.psi_a),
        np.ascontiguousarray(psi0.psi_b),
        u,
        config.n_steps,
        n_sub,
        dt,
    )
    rec = ProductTrajectoryRecord(
        times=config.times[: len(sa)],
        states_a=sa,
        states_b=sb,
        jump_log=[((k + 1) * dt, int(m)) for k, m in zip(jk, jm)],
    )
    if status:
        reason = "undefined post-jump state" if status == 2 else "non-finite amplitudes"
        rec.aborted = ((fail + 1) * dt, reason)
    return rec


def swap_restricted_weights(gamma, tau, s):
    """Weights of |psi_A psi_B> and |psi_B psi_A> after s restricted swap steps.

    The even and odd binomial sums collapse to (1 +/- (1 - 2 gamma tau)^s) / 2.
    """
    x = gamma * tau
    if s < 0 or not 0.0 <= x <= 1.0:
        raise ValueError("need s >= 0 and gamma * tau in [0, 1]")
    q = (1.0 - 2.0 * x) ** s
    return 0.5 * (1.0 + q), 0.5 * (1.0 - q)


def swap_restricted_closed_form(gamma, tau, s, state):
    even, odd = swap_restricted_weights(gamma, tau, s)
    return even * state.density() + odd * state.swapped().density()


def _local(op_a, op_b):
    return tensor_product(op_a, np.eye(op_b.shape[0])) + tensor_product(
        np.eye(op_a.shape[0]), op_b
    )


def separable_generator_rhs(model, state):
    """Right-hand side of the separability Lindblad equation on a product state.

    Every channel must have a nonvanishing <L>; callers screen channels first.
    """
    red = reduce_all(model, state)
    rho = state.density()
    h_loc = _local(red.hamiltonian_a, red.hamiltonian_b)
    out = 1j * (rho @ h_loc - h_loc @ rho)
    for m in range(len(model.lindblads)):
        g = _local(red.decay_a[m], red.decay_b[m])
        out += red.rate[m] * rho - 0.5 * (g @ rho + rho @ g)
        j = tensor_product(red.lindblad_a[m], red.lindblad_b[m]) / red.expectation[m]
        out += j @ rho @ j.conj().T
    return out


def generator_consistency_check(model, state, tau):
    """Max-norm distance between the generator and one averaged Kraus step.

    Compares ``separable_generator_rhs`` with ``(E[branch mixture] - rho) / tau``
    built from :func:`separable_kraus_step`.  Channels with <L> = 0 but a
    nonzero rate cannot enter the generator; they are dropped from both sides
    and reported.  Returns ``(residual, notices)``.
    """
    red = reduce_all(model, state)
    keep, notices = [], []
    for m, op in enumerate(model.lindblads):
        if abs(red.expectation[m]) < EXPECTATION_TOL:
            if red.rate[m] > 0.0:
                notices.append(f"channel {m + 1} skipped: <L> vanishes on this state")
                continue
            # zero rate and zero expectation: the channel does not act here
            continue
        keep.append(op)
    for msg in notices:
        warnings.warn(msg, stacklevel=2)
    sub = SystemModel(model.dim_a, model.dim_b, model.hamiltonian, tuple(keep), model.label)
    rhs = separable_generator_rhs(sub, state)
    rho = state.density()
    mix = np.zeros_like(rho)
    for br in separable_kraus_step(sub, state, tau):
        if br.state is not None:
            mix += br.weight * br.state.density()
    residual = float(np.max(np.abs((mix - rho) / tau - rhs)))
    return residual, notices
