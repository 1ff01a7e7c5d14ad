"""Compiled vs numpy kernels on the Bell-decay workload.

    python benchmarks/bench_kernels.py [--trajectories 200] [--repeat 3]

Runs the same trajectories (same uniforms) through both backends, checks the
results agree, and prints the best-of-``repeat`` wall time per backend.
"""
import argparse
import time

import numpy as np

from seplind import _pykernels
from seplind.full import EvolutionConfig, substeps_per_step
from seplind.model import effective_hamiltonian
from seplind.rng import TrajectoryStream
from seplind.scenarios import build_bell_decay, default_initial_state

try:
    from seplind import _kernels
except ImportError:
    _kernels = None


def workload(n_traj):
    model = build_bell_decay()
    psi = default_initial_state("bell_decay")
    cfg = EvolutionConfig(t_max=2.0, tau=0.2)
    n_sub = substeps_per_step(model, cfg)
    dt = cfg.tau / n_sub
    lops = np.ascontiguousarray(model.lindblad_array)
    heff = np.ascontiguousarray(effective_hamiltonian(model))
    k0 = np.ascontiguousarray(np.eye(4) - 1j * dt * heff)
    us = [TrajectoryStream(0, i).uniforms(cfg.n_steps * n_sub) for i in range(n_traj)]
    full = [(k0, lops, psi.vector, u, cfg.n_steps, n_sub, dt) for u in us]
    sep = [(heff, lops, psi.psi_a, psi.psi_b, u, cfg.n_steps, n_sub, dt) for u in us]
    return full, sep


def jacobi_workload(n_mats):
    rng = np.random.default_rng(0)
    out = []
    for _ in range(n_mats):
        x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        out.append(np.ascontiguousarray(x + x.conj().T))
    return out


def best_time(fn, repeat):
    best, result = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench(name, mod, full, sep, mats, repeat):
    t_full, r_full = best_time(lambda: [mod.full_trajectory(*a) for a in full], repeat)
    t_sep, r_sep = best_time(lambda: [mod.separable_trajectory(*a) for a in sep], repeat)

    def eig():
        out = []
        for h in mats:
            a, v = h.copy(), np.eye(4, dtype=complex)
            mod.jacobi_sweeps(a, v, 1e-14 * np.linalg.norm(h), 64)
            out.append(np.sort(np.diag(a).real))
        return out

    t_eig, r_eig = best_time(eig, repeat)
    return {"full": (t_full, r_full), "separable": (t_sep, r_sep), "jacobi": (t_eig, r_eig)}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trajectories", type=int, default=200)
    p.add_argument("--matrices", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    full, sep = workload(args.trajectories)
    mats = jacobi_workload(args.matrices)
    results = {"python": bench("python", _pykernels, full, sep, mats, args.repeat)}
    if _kernels is None:
        print("compiled kernels not built; timing the numpy fallback only")
    else:
        results["compiled"] = bench("compiled", _kernels, full, sep, mats, args.repeat)
        py, cc = results["python"], results["compiled"]
        for a, b in zip(py["full"][1], cc["full"][1]):
            assert np.allclose(a[0], b[0], atol=1e-12) and np.array_equal(a[1], b[1])
        for a, b in zip(py["separable"][1], cc["separable"][1]):
            assert np.allclose(a[0], b[0], atol=1e-12) and np.array_equal(a[2], b[2])
        assert np.allclose(py["jacobi"][1], cc["jacobi"][1], atol=1e-12)

    print(f"{'kernel':<12}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for kernel in ("full", "separable", "jacobi"):
        t_py = results["python"][kernel][0]
        line = f"{kernel:<12}{t_py:>12.4f}"
        if "compiled" in results:
            t_cc = results["compiled"][kernel][0]
            line += f"{t_cc:>14.4f}{t_py / t_cc:>9.1f}x"
        print(line)
    print(f"({args.trajectories} bell-decay trajectories of 200 substeps; "
          f"{args.matrices} 4x4 eigenproblems)")


if __name__ == "__main__":
    main()
