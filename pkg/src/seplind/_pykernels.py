"""Pure numpy kernels: quantum-jump trajectories and Jacobi sweeps.

Same call signatures and return values as the compiled ``_kernels`` module.
Status codes: 0 ok, 1 non-finite amplitudes, 2 undefined post-jump state.
"""
import math

import numpy as np

OK = 0
NONFINITE = 1
UNDEFINED_JUMP = 2

JUMP_NORM_TOL = 1e-12


def full_trajectory(k0, lops, psi0, uniforms, n_steps, n_sub, dt):
    """First-order quantum-jump unravelling of the full Lindblad dynamics.

    ``k0`` is the no-jump propagator I - i dt H_eff, ``lops`` has shape
    (M, d, d).  Returns ``(states, jump_substeps, jump_channels, status,
    fail_substep)`` with states recorded every ``n_sub`` substeps.
    """
    d = psi0.shape[0]
    states = np.zeros((n_steps + 1, d), dtype=np.complex128)
    psi = np.array(psi0, dtype=np.complex128)
    states[0] = psi
    jump_k, jump_m = [], []
    for step in range(n_steps):
        for sub in range(n_sub):
            k = step * n_sub + sub
            jv = lops @ psi
            rates = np.einsum("md,md->m", jv.conj(), jv).real
            probs = dt * rates
            u = uniforms[k]
            if u < probs.sum():
                m = int(np.searchsorted(np.cumsum(probs), u, side="right"))
                m = min(m, len(probs) - 1)
                nrm = math.sqrt(rates[m])
                psi = jv[m] / nrm
                jump_k.append(k)
                jump_m.append(m)
            else:
                tmp = k0 @ psi
                nrm = math.sqrt(np.vdot(tmp, tmp).real)
                psi = tmp / nrm
            if not (math.isfinite(nrm) and nrm > 0.0):
                return (states[: step + 1], np.array(jump_k, dtype=np.int64),
                        np.array(jump_m, dtype=np.int64), NONFINITE, k)
        states[step + 1] = psi
    return (states, np.array(jump_k, dtype=np.int64),
            np.array(jump_m, dtype=np.int64), OK, -1)


def separable_trajectory(heff, lops, psi_a0, psi_b0, uniforms, n_steps, n_sub, dt):
    """Restricted (product-state) unravelling with reduced operators.

    Reduced operators are never formed explicitly: (X)_A psi_A is obtained by
    contracting X (psi_A x psi_B) with psi_B, and likewise for B.  Returns
    ``(states_a, states_b, jump_substeps, jump_channels, status, fail_substep)``.
    """
    d_a = psi_a0.shape[0]
    d_b = psi_b0.shape[0]
    states_a = np.zeros((n_steps + 1, d_a), dtype=np.complex128)
    states_b = np.zeros((n_steps + 1, d_b), dtype=np.complex128)
    a = np.array(psi_a0, dtype=np.complex128)
    b = np.array(psi_b0, dtype=np.complex128)
    states_a[0] = a
    states_b[0] = b
    jump_k, jump_m = [], []

    def _fail(step, k, code):
        return (states_a[: step + 1], states_b[: step + 1],
                np.array(jump_k, dtype=np.int64), np.array(jump_m, dtype=np.int64),
                code, k)

    for step in range(n_steps):
        for sub in range(n_sub):
            k = step * n_sub + sub
            na2 = np.vdot(a, a).real
            nb2 = np.vdot(b, b).real
            psi = np.kron(a, b)
            jv = lops @ psi
            rates = np.einsum("md,md->m", jv.conj(), jv).real / (na2 * nb2)
            probs = dt * rates
            u = uniforms[k]
            if u < probs.sum():
                m = int(np.searchsorted(np.cumsum(probs), u, side="right"))
                m = min(m, len(probs) - 1)
                w = jv[m].reshape(d_a, d_b)
                new_a = (w @ b.conj()) / nb2
                new_b = (a.conj() @ w) / na2
                jump_k.append(k)
                jump_m.append(m)
                nra = math.sqrt(np.vdot(new_a, new_a).real)
                nrb = math.sqrt(np.vdot(new_b, new_b).real)
                if not (math.isfinite(nra) and math.isfinite(nrb)):
                    return _fail(step, k, NONFINITE)
                if nra * nrb < JUMP_NORM_TOL:
                    return _fail(step, k, UNDEFINED_JUMP)
            else:
                w = (heff @ psi).reshape(d_a, d_b)
                new_a = a - 1j * dt * (w @ b.conj()) / nb2
                new_b = b - 1j * dt * (a.conj() @ w) / na2
                nra = math.sqrt(np.vdot(new_a, new_a).real)
                nrb = math.sqrt(np.vdot(new_b, new_b).real)
                if not (math.isfinite(nra) and math.isfinite(nrb) and nra > 0.0 and nrb > 0.0):
                    return _fail(step, k, NONFINITE)
            a = new_a / nra
            b = new_b / nrb
        states_a[step + 1] = a
        states_b[step + 1] = b
    return (states_a, states_b, np.array(jump_k, dtype=np.int64),
            np.array(jump_m, dtype=np.int64), OK, -1)


def _off_norm(a):
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_sweeps(a, v, threshold, max_sweeps):
    """Cyclic complex Jacobi rotations applied in place to Hermitian ``a``.

    Accumulates the rotations into ``v``.  Returns True once the off-diagonal
    Frobenius norm is at most ``threshold``.
    """
    n = a.shape[0]
    for _ in range(max_sweeps):
        if _off_norm(a) <= threshold:
            return True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                # t = tan(theta) with tan(2 theta) = 2r / (app - aqq), |theta| <= pi/4
                zeta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if abs(zeta) > 1e150:
                    t = -0.5 / zeta
                else:
                    sign = 1.0 if zeta >= 0.0 else -1.0
                    t = -sign / (abs(zeta) + math.sqrt(zeta * zeta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                u = np.array([[c, -s * phase], [s * phase.conjugate(), c]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[q, p] = 0.0
                a[p, q] = 0.0
                v[:, idx] = v[:, idx] @ u
    return _off_norm(a) <= threshold
