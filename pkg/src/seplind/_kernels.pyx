# cython: language_level=3
"""Compiled kernels; see ``_pykernels`` for the reference versions."""
import numpy as np

from libc.math cimport fabs, sqrt, isfinite

cdef int OK = 0
cdef int NONFINITE = 1
cdef int UNDEFINED_JUMP = 2
cdef double JUMP_NORM_TOL = 1e-12


cdef inline double abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline void matvec(const double complex[:, ::1] m, double complex[::1] x,
                        double complex[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, n = m.shape[0]
    cdef double complex acc
    for i in range(n):
        acc = 0
        for j in range(n):
            acc = acc + m[i, j] * x[j]
        out[i] = acc


cdef inline Py_ssize_t choose_channel(double[::1] probs, double u) noexcept nogil:
    cdef Py_ssize_t m, n = probs.shape[0]
    cdef double acc = 0.0
    for m in range(n):
        acc += probs[m]
        if u < acc:
            return m
    return n - 1


def full_trajectory(const double complex[:, ::1] k0, const double complex[:, :, ::1] lops,
                    const double complex[::1] psi0, const double[::1] uniforms,
                    Py_ssize_t n_steps, Py_ssize_t n_sub, double dt):
    cdef Py_ssize_t d = psi0.shape[0]
    cdef Py_ssize_t n_ops = lops.shape[0]
    cdef Py_ssize_t step, sub, k, m, i
    cdef double total, nrm, u
    states_np = np.zeros((n_steps + 1, d), dtype=np.complex128)
    cdef double complex[:, ::1] states = states_np
    psi_np = np.array(psi0, dtype=np.complex128)
    cdef double complex[::1] psi = psi_np
    cdef double complex[::1] tmp = np.zeros(d, dtype=np.complex128)
    cdef double complex[:, ::1] jv = np.zeros((max(n_ops, 1), d), dtype=np.complex128)
    cdef double[::1] probs = np.zeros(n_ops, dtype=np.float64)
    jump_k = []
    jump_m = []

    for i in range(d):
        states[0, i] = psi[i]
    for step in range(n_steps):
        for sub in range(n_sub):
            k = step * n_sub + sub
            total = 0.0
            for m in range(n_ops):
                matvec(lops[m], psi, jv[m])
                nrm = 0.0
                for i in range(d):
                    nrm += abs2(jv[m, i])
                probs[m] = dt * nrm
                total += probs[m]
            u = uniforms[k]
            if u < total:
                m = choose_channel(probs, u)
                nrm = sqrt(probs[m] / dt)
                for i in range(d):
                    psi[i] = jv[m, i] / nrm
                jump_k.append(k)
                jump_m.append(m)
            else:
                matvec(k0, psi, tmp)
                nrm = 0.0
                for i in range(d):
                    nrm += abs2(tmp[i])
                nrm = sqrt(nrm)
                for i in range(d):
                    psi[i] = tmp[i] / nrm
            if not (isfinite(nrm) and nrm > 0.0):
                return (states_np[: step + 1], np.array(jump_k, dtype=np.int64),
                        np.array(jump_m, dtype=np.int64), NONFINITE, k)
        for i in range(d):
            states[step + 1, i] = psi[i]
    return (states_np, np.array(jump_k, dtype=np.int64),
            np.array(jump_m, dtype=np.int64), OK, -1)


cdef inline void contract_b(double complex[::1] w, double complex[::1] b,
                            Py_ssize_t d_a, Py_ssize_t d_b,
                            double complex[::1] out) noexcept nogil:
    # out[i] = sum_k conj(b[k]) w[i*d_b + k]
    cdef Py_ssize_t i, k
    cdef double complex acc
    for i in range(d_a):
        acc = 0
        for k in range(d_b):
            acc = acc + b[k].conjugate() * w[i * d_b + k]
        out[i] = acc


cdef inline void contract_a(double complex[::1] w, double complex[::1] a,
                            Py_ssize_t d_a, Py_ssize_t d_b,
                            double complex[::1] out) noexcept nogil:
    # out[k] = sum_i conj(a[i]) w[i*d_b + k]
    cdef Py_ssize_t i, k
    for k in range(d_b):
        out[k] = 0
    for i in range(d_a):
        for k in range(d_b):
            out[k] = out[k] + a[i].conjugate() * w[i * d_b + k]


def separable_trajectory(const double complex[:, ::1] heff,
                         const double complex[:, :, ::1] lops,
                         const double complex[::1] psi_a0, const double complex[::1] psi_b0,
                         const double[::1] uniforms, Py_ssize_t n_steps, Py_ssize_t n_sub,
                         double dt):
    cdef Py_ssize_t d_a = psi_a0.shape[0]
    cdef Py_ssize_t d_b = psi_b0.shape[0]
    cdef Py_ssize_t d = d_a * d_b
    cdef Py_ssize_t n_ops = lops.shape[0]
    cdef Py_ssize_t step, sub, k, m, i, j
    cdef double total, na2, nb2, nra, nrb, u, r
    cdef int code = OK
    sa_np = np.zeros((n_steps + 1, d_a), dtype=np.complex128)
    sb_np = np.zeros((n_steps + 1, d_b), dtype=np.complex128)
    cdef double complex[:, ::1] states_a = sa_np
    cdef double complex[:, ::1] states_b = sb_np
    cdef double complex[::1] a = np.array(psi_a0, dtype=np.complex128)
    cdef double complex[::1] b = np.array(psi_b0, dtype=np.complex128)
    cdef double complex[::1] psi = np.zeros(d, dtype=np.complex128)
    cdef double complex[::1] w = np.zeros(d, dtype=np.complex128)
    cdef double complex[::1] new_a = np.zeros(d_a, dtype=np.complex128)
    cdef double complex[::1] new_b = np.zeros(d_b, dtype=np.complex128)
    cdef double complex[:, ::1] jv = np.zeros((max(n_ops, 1), d), dtype=np.complex128)
    cdef double[::1] probs = np.zeros(n_ops, dtype=np.float64)
    jump_k = []
    jump_m = []

    for i in range(d_a):
        states_a[0, i] = a[i]
    for i in range(d_b):
        states_b[0, i] = b[i]

    for step in range(n_steps):
        for sub in range(n_sub):
            k = step * n_sub + sub
            na2 = 0.0
            nb2 = 0.0
            for i in range(d_a):
                na2 += abs2(a[i])
            for j in range(d_b):
                nb2 += abs2(b[j])
            for i in range(d_a):
                for j in range(d_b):
                    psi[i * d_b + j] = a[i] * b[j]
            total = 0.0
            for m in range(n_ops):
                matvec(lops[m], psi, jv[m])
                r = 0.0
                for i in range(d):
                    r += abs2(jv[m, i])
                probs[m] = dt * r / (na2 * nb2)
                total += probs[m]
            u = uniforms[k]
            if u < total:
                m = choose_channel(probs, u)
                contract_b(jv[m], b, d_a, d_b, new_a)
                contract_a(jv[m], a, d_a, d_b, new_b)
                for i in range(d_a):
                    new_a[i] = new_a[i] / nb2
                for j in range(d_b):
                    new_b[j] = new_b[j] / na2
                jump_k.append(k)
                jump_m.append(m)
            else:
                matvec(heff, psi, w)
                contract_b(w, b, d_a, d_b, new_a)
                contract_a(w, a, d_a, d_b, new_b)
                for i in range(d_a):
                    new_a[i] = a[i] - 1j * dt * new_a[i] / nb2
                for j in range(d_b):
                    new_b[j] = b[j] - 1j * dt * new_b[j] / na2
            nra = 0.0
            nrb = 0.0
            for i in range(d_a):
                nra += abs2(new_a[i])
            for j in range(d_b):
                nrb += abs2(new_b[j])
            nra = sqrt(nra)
            nrb = sqrt(nrb)
            if not (isfinite(nra) and isfinite(nrb)):
                code = NONFINITE
            elif u < total and nra * nrb < JUMP_NORM_TOL:
                code = UNDEFINED_JUMP
            elif not (nra > 0.0 and nrb > 0.0):
                code = NONFINITE
            if code != OK:
                return (sa_np[: step + 1], sb_np[: step + 1],
                        np.array(jump_k, dtype=np.int64),
                        np.array(jump_m, dtype=np.int64), code, k)
            for i in range(d_a):
                a[i] = new_a[i] / nra
            for j in range(d_b):
                b[j] = new_b[j] / nrb
        for i in range(d_a):
            states_a[step + 1, i] = a[i]
        for j in range(d_b):
            states_b[step + 1, j] = b[j]
    return (sa_np, sb_np, np.array(jump_k, dtype=np.int64),
            np.array(jump_m, dtype=np.int64), OK, -1)


cdef double off_norm(double complex[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t i, j, n = a.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += abs2(a[i, j])
    return sqrt(acc)


def jacobi_sweeps(double complex[:, ::1] a, double complex[:, ::1] v,
                  double threshold, int max_sweeps):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double r, zeta, sign, t, c, s
    cdef double complex phase, x, y, up, uq
    for sweep in range(max_sweeps):
        if off_norm(a) <= threshold:
            return True
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = sqrt(abs2(a[p, q]))
                if r <= 1e-300:
                    continue
                phase = a[p, q] / r
                zeta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if fabs(zeta) > 1e150:
                    t = -0.5 / zeta
                else:
                    sign = 1.0 if zeta >= 0.0 else -1.0
                    t = -sign / (fabs(zeta) + sqrt(zeta * zeta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                # u = [[c, -s phase], [s conj(phase), c]]
                up = s * phase.conjugate()
                uq = -s * phase
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q]
                    a[k, p] = x * c + y * up
                    a[k, q] = x * uq + y * c
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = c * x + phase * s * y
                    a[q, k] = -s * phase.conjugate() * x + c * y
                a[q, p] = 0
                a[p, q] = 0
                for k in range(n):
                    x = v[k, p]
                    y = v[k, q]
                    v[k, p] = x * c + y * up
                    v[k, q] = x * uq + y * c
    return off_norm(a) <= threshold
