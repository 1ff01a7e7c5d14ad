"""Quick invariant checks behind ``seplind check``.

Each check returns ``(ok, detail)``.  These are fast sanity checks on an
installed copy; the pytest suite is far more thorough.
"""
import numpy as np

from .ensemble import run_ensemble
from .full import EvolutionConfig, integrate_master, kraus_step_full
from .model import (
    ProductState,
    SystemModel,
    effective_hamiltonian,
    is_separable_generator,
    reduce_all,
)
from .numerics import jacobi_eigh, operator_schmidt_rank, partial_transpose
from .observables import negativity
from .scenarios import (
    STATES,
    SWAP,
    bell_decay_oracle,
    build_bell_decay,
    build_swap,
    default_initial_state,
    swap_full_oracle,
)
from .separable import generator_consistency_check, swap_restricted_weights


def check_eigensolver():
    rng = np.random.default_rng(1)
    worst = 0.0
    for n in (2, 4, 8, 16):
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = x + x.conj().T
        w, v = jacobi_eigh(h)
        worst = max(worst, float(np.max(np.abs((v * w) @ v.conj().T - h))))
    return worst < 1e-8, f"max reconstruction error {worst:.2e}"


def check_partial_transpose():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = x @ x.conj().T
    ok = np.array_equal(partial_transpose(partial_transpose(rho, (2, 2)), (2, 2)), rho)
    return ok, "involution exact" if ok else "involution broken"


def check_bell_negativity():
    v = STATES["phi+"]
    n = negativity(np.outer(v, v.conj()))
    return abs(n - 0.5) < 1e-10, f"N(phi+) = {n:.12f}"


def check_schmidt_ranks():
    bell = build_bell_decay()
    ranks = [operator_schmidt_rank(op, (2, 2)) for op in bell.lindblads]
    sx = np.array([[0, 1], [1, 0]])
    prod = operator_schmidt_rank(np.kron(sx, np.diag([1, 2])), (2, 2))
    swap = operator_schmidt_rank(SWAP, (2, 2))
    ok = prod == 1 and swap == 4 and ranks == [2, 2, 2, 2]
    return ok, f"product {prod}, swap {swap}, bell {ranks}"


def check_swap_integrator():
    model = build_swap(1.0)
    psi = default_initial_state("swap_exchange")
    cfg = EvolutionConfig(t_max=3.0, tau=0.05)
    err = max(
        float(np.max(np.abs(rho - swap_full_oracle(1.0, t, psi))))
        for t, rho in integrate_master(model, psi.density(), cfg)
    )
    return err < 1e-6, f"max deviation {err:.2e}"


def check_bell_integrator():
    model = build_bell_decay()
    cfg = EvolutionConfig(t_max=2.0, tau=0.1)
    err = 0.0
    for t, rho in integrate_master(model, np.outer(STATES["11"], STATES["11"]), cfg):
        pops, _ = bell_decay_oracle((9, 1, 1, 9), t)
        got = [np.vdot(STATES[k], rho @ STATES[k]).real for k in ("11", "phi+", "phi-", "00")]
        err = max(err, float(np.max(np.abs(np.array(got) - pops))))
    return err < 1e-6, f"max population deviation {err:.2e}"


def check_kraus_weights():
    model = build_bell_decay()
    w = [b[0] for b in kraus_step_full(model, STATES["11"], 0.01)]
    # no-jump weight is (1 - 5 tau)^2; total within 2 tau^2 (sum ||L^dag L||)^2 of 1
    ok = abs(w[1] - 0.09) < 1e-12 and abs(w[3] - 0.01) < 1e-12 and abs(w[0] - 0.9025) < 1e-12
    ok &= abs(sum(w) - 1) <= 2 * 0.01**2 * 10.0**2
    return ok, f"weights {np.round(w, 6).tolist()}"


def check_swap_reduction():
    model = build_swap(1.0)
    psi = default_initial_state("swap_exchange")
    red = reduce_all(model, psi)
    ok = np.allclose(red.lindblad_a[0], np.outer(psi.psi_b, psi.psi_b.conj()))
    ok &= np.allclose(red.lindblad_b[0], np.outer(psi.psi_a, psi.psi_a.conj()))
    ok &= abs(red.expectation[0] - 0.5) < 1e-12
    return bool(ok), f"<V> = {red.expectation[0].real:.6f}"


def check_separability_diagnostic():
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0, 1], [1, 0]])
    local = SystemModel(2, 2, np.kron(sz, np.eye(2)) + np.kron(np.eye(2), sz), (np.kron(sx, np.eye(2)),))
    ok = (
        is_separable_generator(local)[0]
        and not is_separable_generator(build_swap(1.0))[0]
        and not is_separable_generator(build_bell_decay())[0]
    )
    return ok, "local model accepted, swap and bell rejected" if ok else "diagnostic mismatch"


def check_generator_consistency():
    model = build_swap(1.0)
    psi = ProductState.normalized([1, 0], [1, 1])
    r1, _ = generator_consistency_check(model, psi, 1e-3)
    r2, _ = generator_consistency_check(model, psi, 5e-4)
    ratio = (r1 / 1e-3) / (r2 / 5e-4)
    return 0.5 <= ratio <= 2.0, f"residual/tau ratio under halving {ratio:.3f}"


def check_restricted_swap_product():
    model = build_swap(1.0)
    psi = default_initial_state("swap_exchange")
    cfg = EvolutionConfig(t_max=1.0, tau=0.05, n_trajectories=200)
    res = run_ensemble("separable_mcwf", model, psi, cfg, n_batches=10)
    rho = res.mean()
    n = max(negativity(r) for r in rho)
    even, _ = swap_restricted_weights(1.0, 0.05, 20)
    p01 = rho[-1][1, 1].real
    return n <= 1e-10 and abs(2 * p01 - even) < 0.15, f"max negativity {n:.1e}, flip weight {1 - 2 * p01:.3f}"


def check_heff():
    h = effective_hamiltonian(build_swap(2.0))
    return bool(np.allclose(h, -1j * np.eye(4))), "H_eff = -i gamma/2 I"


CHECKS = {
    "eigensolver reconstruction": check_eigensolver,
    "partial transpose involution": check_partial_transpose,
    "negativity of phi+": check_bell_negativity,
    "operator Schmidt ranks": check_schmidt_ranks,
    "effective hamiltonian (swap)": check_heff,
    "swap reduced operators": check_swap_reduction,
    "separable generator diagnostic": check_separability_diagnostic,
    "Kraus branch weights": check_kraus_weights,
    "RK4 vs swap closed form": check_swap_integrator,
    "RK4 vs Bell cascade": check_bell_integrator,
    "generator consistency (swap)": check_generator_consistency,
    "restricted swap ensemble": check_restricted_swap_product,
}


def run_checks(echo=print):
    failures = 0
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # report and continue
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failures += not ok
        echo(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return failures
