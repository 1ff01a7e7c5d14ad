"""Parallel trajectory ensembles with deterministic merging.

Trajectory i always uses stream (seed, i) and lands in batch
``i // (n_trajectories // n_batches)``.  Workers return composite state
arrays; the parent accumulates them in index order, so the sums are the
same bit for bit for any worker count.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .full import TrajectoryAborted, mcwf_trajectory_full, substeps_per_step
from .observables import EnsembleAccumulator
from .rng import TrajectoryStream
from .separable import mcwf_trajectory_separable

__all__ = ["ENGINES", "EnsembleResult", "AbortFractionError", "run_ensemble"]

ENGINES = ("full_mcwf", "separable_mcwf")
MAX_ABORT_FRACTION = 0.01


class AbortFractionError(RuntimeError):
    pass


@dataclass
class EnsembleResult:
    engine: str
    times: np.ndarray
    accumulator: EnsembleAccumulator
    n_trajectories: int
    aborted: list = field(default_factory=list)
    n_jumps: int = 0
    substeps: int = 1

    @property
    def abort_fraction(self):
        return len(self.aborted) / self.n_trajectories

    def mean(self):
        return self.accumulator.mean()


def _run_one(engine, model, initial, config, index):
    stream = TrajectoryStream(config.seed, index)
    if engine == "full_mcwf":
        psi0 = initial.vector if hasattr(initial, "vector") else np.asarray(initial)
        try:
            rec = mcwf_trajectory_full(model, psi0, config, stream)
        except TrajectoryAborted as exc:
            return None, str(exc), 0
        return rec.states, None, len(rec.jump_log)
    if engine == "separable_mcwf":
        rec = mcwf_trajectory_separable(model, initial, config, stream)
        if rec.aborted is not None:
            t, reason = rec.aborted
            return None, f"trajectory {index}: {reason} at t={t:g}", len(rec.jump_log)
        return rec.composite(), None, len(rec.jump_log)
    raise ValueError(f"unknown engine {engine!r}")


def _run_chunk(args):
    engine, model, initial, config, start, stop = args
    return [_run_one(engine, model, initial, config, i) for i in range(start, stop)]


def run_ensemble(engine, model, initial, config, n_batches=20, workers=1,
                 check_aborts=True):
    """Run ``config.n_trajectories`` trajectories and accumulate per batch.

    ``initial`` is a ProductState (both engines) or a vector (full engine).
    Raises :class:`AbortFractionError` if more than 1% of trajectories abort
    and ``check_aborts`` is set.
    """
    n = config.n_trajectories
    if n % n_batches:
        raise ValueError(f"n_trajectories={n} is not divisible by batches={n_batches}")
    per_batch = n // n_batches
    n_times = config.n_steps + 1
    acc = EnsembleAccumulator(n_times, model.dim, n_batches)

    if workers <= 1:
        results = _run_chunk((engine, model, initial, config, 0, n))
    else:
        size = -(-n // (workers * 4))
        chunks = [(engine, model, initial, config, s, min(s + size, n)) for s in range(0, n, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_run_chunk, chunks) for r in part]

    aborted, n_jumps = [], 0
    for i, (states, err, jumps) in enumerate(results):
        n_jumps += jumps
        if err is not None:
            aborted.append(err)
            continue
        acc.add(i // per_batch, states)

    res = EnsembleResult(
        engine=engine,
        times=config.times,
        accumulator=acc,
        n_trajectories=n,
        aborted=aborted,
        n_jumps=n_jumps,
        substeps=substeps_per_step(model, config),
    )
    if check_aborts and res.abort_fraction > MAX_ABORT_FRACTION:
        exc = AbortFractionError(
            f"{engine}: {len(aborted)} of {n} trajectories aborted "
            f"({100 * res.abort_fraction:.2f}% > 1%); first: {aborted[0]}"
        )
        exc.result = res
        raise exc
    return res
