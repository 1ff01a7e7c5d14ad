"""Entanglement and population observables, ensemble accumulation, bootstrap bands."""
from dataclasses import dataclass

import numpy as np

from .numerics import hermitian_eigenvalues, partial_transpose

__all__ = [
    "TimeSeries",
    "EnsembleAccumulator",
    "negativity",
    "population",
    "purity",
    "bootstrap_band",
    "bootstrap_density_band",
]


@dataclass
class TimeSeries:
    """Mean curve with its one-sigma band.

    ``resolution`` is the smallest probability step the estimate can resolve
    (1/N for an N-trajectory ensemble, 0 for exact curves).  It is not written
    to CSV; comparisons use it as a floor on the band.
    """

    times: np.ndarray
    mean: np.ndarray
    stddev: np.ndarray
    label: str = ""
    resolution: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.mean = np.asarray(self.mean, dtype=float)
        self.stddev = np.asarray(self.stddev, dtype=float)
        if not len(self.times) == len(self.mean) == len(self.stddev):
            raise ValueError("times, mean and stddev must have equal lengths")
        if np.any(self.stddev < 0):
            raise ValueError("stddev must be nonnegative")

    def to_csv(self):
        lines = ["time,mean,stddev"]
        for t, m, s in zip(self.times, self.mean, self.stddev):
            lines.append(f"{t:.12g},{m:.12g},{s:.12g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text, label=""):
        rows = [r for r in text.strip().splitlines()[1:] if r]
        data = np.array([[float(x) for x in r.split(",")] for r in rows]).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1], data[:, 2], label)


def negativity(rho, dims=(2, 2)):
    """Magnitude of the smallest negative eigenvalue of the partial transpose."""
    lam = hermitian_eigenvalues(partial_transpose(rho, dims, "B"))
    if tuple(dims) == (2, 2):
        # a 2x2 partial transpose has at most one negative eigenvalue
        assert lam[1] > -1e-9, "more than one negative eigenvalue for two qubits"
    return max(0.0, -float(lam[0]))


def population(rho, target):
    target = np.asarray(target, dtype=np.complex128).ravel()
    p = float(np.vdot(target, np.asarray(rho) @ target).real)
    if p < -1e-12 or p > 1.0 + 1e-12:
        raise ValueError(f"population {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def purity(rho):
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


class EnsembleAccumulator:
    """Running density-matrix sums per batch and grid time.

    Adding trajectories in a fixed order gives bit-identical sums;
    ``merge`` combines accumulators that cover disjoint batches or share
    batch boundaries.
    """

    def __init__(self, n_times, dim, n_batches):
        self.sums = np.zeros((n_batches, n_times, dim, dim), dtype=np.complex128)
        self.counts = np.zeros(n_batches, dtype=np.int64)

    @property
    def n_batches(self):
        return self.sums.shape[0]

    @property
    def count(self):
        return int(self.counts.sum())

    def add(self, batch, states):
        """Add one trajectory given as composite vectors of shape (n_times, dim)."""
        states = np.asarray(states)
        self.sums[batch] += np.einsum("ti,tj->tij", states, states.conj())
        self.counts[batch] += 1

    def merge(self, other):
        if other.sums.shape != self.sums.shape:
            raise ValueError("accumulator shapes differ")
        out = EnsembleAccumulator(self.sums.shape[1], self.sums.shape[2], self.n_batches)
        out.sums = self.sums + other.sums
        out.counts = self.counts + other.counts
        return out

    def mean(self):
        if self.count == 0:
            raise ValueError("empty ensemble")
        return self.sums.sum(axis=0) / self.count

    def batch_means(self):
        ok = self.counts > 0
        return self.sums[ok] / self.counts[ok, None, None, None]


def bootstrap_band(samples, resamples=200, seed=0, times=None, label=""):
    """Mean and bootstrap standard deviation of the batch mean.

    ``samples`` has shape (n_batches, n_times): one observable value per
    batch and grid time.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise ValueError("bootstrap needs at least 2 batches")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(resamples, n))
    boot = x[idx].mean(axis=1)
    if times is None:
        times = np.arange(x.shape[1], dtype=float)
    return TimeSeries(times, x.mean(axis=0), boot.std(axis=0), label)


def bootstrap_density_band(acc, observable, resamples=200, seed=0, times=None, label=""):
    """Bootstrap band of a (possibly nonlinear) function of the averaged state.

    Batches are resampled with replacement, their density-matrix sums pooled,
    and ``observable`` evaluated on each pooled mean.
    """
    ok = acc.counts > 0
    sums, counts = acc.sums[ok], acc.counts[ok]
    n, n_times = sums.shape[0], sums.shape[1]
    if n < 2:
        raise ValueError("bootstrap needs at least 2 non-empty batches")
    pooled_all = sums.sum(axis=0) / counts.sum()
    mean = np.array([observable(pooled_all[t]) for t in range(n_times)])
    rng = np.random.default_rng(seed)
    boot = np.empty((resamples, n_times))
    for r in range(resamples):
        idx = rng.integers(0, n, size=n)
        pooled = sums[idx].sum(axis=0) / counts[idx].sum()
        for t in range(n_times):
            boot[r, t] = observable(pooled[t])
    if times is None:
        times = np.arange(n_times, dtype=float)
    return TimeSeries(times, mean, boot.std(axis=0), label, resolution=1.0 / counts.sum())
