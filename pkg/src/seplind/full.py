"""Unrestricted dynamics: Lindblad generator, RK4 reference solver, quantum jumps."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import effective_hamiltonian
from .rng import TrajectoryStream

__all__ = [
    "EvolutionConfig",
    "TrajectoryRecord",
    "IntegrationError",
    "TrajectoryAborted",
    "lindblad_rhs",
    "integrate_master",
    "kraus_step_full",
    "mcwf_trajectory_full",
    "substeps_per_step",
]


class IntegrationError(RuntimeError):
    pass


class TrajectoryAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionConfig:
    """Time grid and sampling parameters.

    ``tau`` is the observation grid spacing.  Jump engines subdivide each grid
    step so the total jump probability per substep stays at or below
    ``substep_threshold``.
    """

    t_max: float = 2.0
    tau: float = 0.2
    substep_threshold: float = 0.1
    seed: int = 0
    n_trajectories: int = 600

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.t_max >= 0:
            raise ValueError("t_max must be nonnegative")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be at least 1")
        if not 0 < self.substep_threshold <= 1:
            raise ValueError("substep_threshold must lie in (0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        n = self.t_max / self.tau
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError("t_max must be an integer multiple of tau")

    @property
    def n_steps(self):
        return int(round(self.t_max / self.tau))

    @property
    def times(self):
        return self.tau * np.arange(self.n_steps + 1)


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray
    jump_log: list = field(default_factory=list)
    aborted: tuple = None


def substeps_per_step(model, config):
    """Smallest substep count keeping tau_sub * max jump rate <= threshold."""
    bound = model.total_rate_bound()
    if bound == 0.0:
        return 1
    return max(1, math.ceil(config.tau * bound / config.substep_threshold - 1e-12))


def lindblad_rhs(model, rho):
    """i[rho, H] + sum_m (L rho L^dagger - {L^dagger L, rho}/2)."""
    rho = np.asarray(rho, dtype=np.complex128)
    h = model.hamiltonian
    out = 1j * (rho @ h - h @ rho)
    for op in model.lindblads:
        dec = op.conj().T @ op
        out += op @ rho @ op.conj().T - 0.5 * (dec @ rho + rho @ dec)
    return out


def _generator_bound(model):
    h = model.hamiltonian
    hn = float(np.linalg.norm(h, 2)) if h.size else 0.0
    return 2.0 * hn + 2.0 * model.total_rate_bound()


def integrate_master(model, rho0, config, accuracy=0.05):
    """Fixed-step RK4 for the Lindblad equation, sampled on the tau grid.

    The internal step is ``min(tau, accuracy / ||generator||)``, keeping the
    global error near 1e-8 for the models in this package.
    """
    rho = np.array(rho0, dtype=np.complex128)
    if rho.shape != (model.dim, model.dim):
        raise ValueError(f"rho0 must be {model.dim}x{model.dim}")
    bound = _generator_bound(model)
    n_int = 1 if bound == 0.0 else max(1, math.ceil(config.tau * bound / accuracy))
    h = config.tau / n_int
    tr0 = np.trace(rho).real
    out = [(0.0, rho.copy())]
    for step in range(config.n_steps):
        for _ in range(n_int):
            k1 = lindblad_rhs(model, rho)
            k2 = lindblad_rhs(model, rho + 0.5 * h * k1)
            k3 = lindblad_rhs(model, rho + 0.5 * h * k2)
            k4 = lindblad_rhs(model, rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)
        if not np.all(np.isfinite(rho)) or abs(np.trace(rho).real - tr0) > 1e-6:
            raise IntegrationError(
                f"trace drift at t={(step + 1) * config.tau:g}; use a smaller step"
            )
        out.append(((step + 1) * config.tau, rho.copy()))
    return out


def kraus_step_full(model, state, tau):
    """One first-order Kraus step: branches K^m|psi> with weights ||K^m psi||^2.

    Branch 0 is the no-jump branch (I - i tau H_eff)|psi>; branch m >= 1 is
    sqrt(tau) L^m |psi>.  Returned vectors are unnormalized.
    """
    psi = np.asarray(state, dtype=np.complex128).ravel()
    k0 = np.eye(model.dim) - 1j * tau * effective_hamiltonian(model)
    branches = [k0 @ psi] + [math.sqrt(tau) * (op @ psi) for op in model.lindblads]
    return [(float(np.vdot(v, v).real), v) for v in branches]


_STATUS = {1: "non-finite or vanishing amplitudes", 2: "undefined post-jump state"}


def mcwf_trajectory_full(model, psi0, config, rng_stream):
    """One quantum-jump trajectory of the unrestricted dynamics.

    ``rng_stream`` is a :class:`~seplind.rng.TrajectoryStream`.  Raises
    :class:`TrajectoryAborted` if amplitudes become non-finite.
    """
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128).ravel()
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized")
    n_sub = substeps_per_step(model, config)
    dt = config.tau / n_sub
    k0 = np.ascontiguousarray(np.eye(model.dim) - 1j * dt * effective_hamiltonian(model))
    u = rng_stream.uniforms(config.n_steps * n_sub)
    states, jk, jm, status, fail = kernels.full_trajectory(
        k0, np.ascontiguousarray(model.lindblad_array), psi0, u, config.n_steps, n_sub, dt
    )
    jumps = [((k + 1) * dt, int(m)) for k, m in zip(jk, jm)]
    if status:
        raise TrajectoryAborted(
            f"trajectory {rng_stream.index}: {_STATUS[status]} at t={(fail + 1) * dt:g}"
        )
    return TrajectoryRecord(times=config.times, states=states, jump_log=jumps)


def default_stream(config, index=0):
    return TrajectoryStream(config.seed, index)
