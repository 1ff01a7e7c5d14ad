"""Built-in two-qubit scenarios and their closed-form solutions.

bell_decay
    |11> decays to |00> through the Bell levels |phi+-> = (|01> +- |10>)/sqrt 2.
swap_exchange
    A single dissipator sqrt(gamma) V with V the swap operator.
"""
import math

import numpy as np

from .model import ModelError, ProductState, SystemModel
from .observables import negativity

__all__ = [
    "BELL_DEFAULT_RATES",
    "BELL_RATE_NAMES",
    "DEFAULT_T_MAX",
    "STATES",
    "SWAP",
    "ket",
    "build_bell_decay",
    "bell_decay_oracle",
    "bell_decay_density",
    "build_swap",
    "swap_full_oracle",
    "swap_full_weights",
    "default_initial_state",
]

DEFAULT_T_MAX = 2.0

BELL_RATE_NAMES = ("g_11_phiplus", "g_phiplus_00", "g_11_phiminus", "g_phiminus_00")
BELL_DEFAULT_RATES = (9.0, 1.0, 1.0, 9.0)

_R2 = 1.0 / math.sqrt(2.0)
STATES = {
    "00": np.array([1, 0, 0, 0], dtype=np.complex128),
    "01": np.array([0, 1, 0, 0], dtype=np.complex128),
    "10": np.array([0, 0, 1, 0], dtype=np.complex128),
    "11": np.array([0, 0, 0, 1], dtype=np.complex128),
    "phi+": np.array([0, _R2, _R2, 0], dtype=np.complex128),
    "phi-": np.array([0, _R2, -_R2, 0], dtype=np.complex128),
}

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


def ket(label):
    try:
        return STATES[label].copy()
    except KeyError:
        raise KeyError(f"unknown basis state {label!r}; known: {sorted(STATES)}") from None


def _check_rates(rates):
    rates = tuple(float(r) for r in rates)
    if any(not math.isfinite(r) or r < 0 for r in rates):
        raise ModelError(f"rates must be finite and nonnegative, got {rates}")
    return rates


def build_bell_decay(rates=BELL_DEFAULT_RATES):
    g1, g2, g3, g4 = _check_rates(rates)
    s00, s11, pp, pm = STATES["00"], STATES["11"], STATES["phi+"], STATES["phi-"]
    ls = (
        math.sqrt(g1) * np.outer(pp, s11),
        math.sqrt(g2) * np.outer(s00, pp),
        math.sqrt(g3) * np.outer(pm, s11),
        math.sqrt(g4) * np.outer(s00, pm),
    )
    return SystemModel(2, 2, np.zeros((4, 4)), ls, label="bell_decay")


def _exp_diff(a, b, t):
    """(exp(-a t) - exp(-b t)) / (b - a), with the a == b limit t exp(-a t)."""
    d = b - a
    if abs(d) * t < 1e-8:
        return t * math.exp(-a * t) * (1.0 - 0.5 * d * t)
    return -math.exp(-a * t) * math.expm1(-d * t) / d


def bell_decay_oracle(rates, t):
    """Populations (p11, p_phi+, p_phi-, p00) and negativity of the full solution.

    Solves the linear cascade 11 -> phi+- -> 00 started in |11>.
    """
    g1, g2, g3, g4 = _check_rates(rates)
    if t < 0:
        raise ValueError("t must be nonnegative")
    k = g1 + g3
    p11 = math.exp(-k * t)
    pp = g1 * _exp_diff(k, g2, t)
    pm = g3 * _exp_diff(k, g4, t)
    p00 = 1.0 - p11 - pp - pm
    pops = (p11, pp, pm, max(p00, 0.0))
    return pops, negativity(bell_decay_density(pops))


def bell_decay_density(pops):
    p11, pp, pm, p00 = pops
    rho = np.zeros((4, 4), dtype=np.complex128)
    for p, label in ((p11, "11"), (pp, "phi+"), (pm, "phi-"), (p00, "00")):
        v = STATES[label]
        rho += p * np.outer(v, v.conj())
    return rho


def build_swap(gamma=1.0):
    (gamma,) = _check_rates((gamma,))
    return SystemModel(2, 2, np.zeros((4, 4)), (math.sqrt(gamma) * SWAP,), label="swap_exchange")


def swap_full_weights(gamma, t):
    """exp(-g t) cosh(g t) and exp(-g t) sinh(g t), written overflow-free."""
    x = math.exp(-2.0 * gamma * t)
    return 0.5 * (1.0 + x), 0.5 * (1.0 - x)


def swap_full_oracle(gamma, t, psi):
    rho = psi.density() if isinstance(psi, ProductState) else np.asarray(psi)
    c, s = swap_full_weights(gamma, t)
    return c * rho + s * (SWAP @ rho @ SWAP)


def default_initial_state(name):
    if name == "bell_decay":
        return ProductState(np.array([0, 1]), np.array([0, 1]))
    if name == "swap_exchange":
        return ProductState(np.array([1, 0]), np.array([_R2, _R2]))
    raise KeyError(f"no default initial state for scenario {name!r}")
