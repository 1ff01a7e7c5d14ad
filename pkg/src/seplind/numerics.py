"""Dense complex linear algebra for small bipartite systems.

Basis ordering is fixed throughout the package: the left tensor factor is
subsystem A, so for two qubits the composite basis is |00>, |01>, |10>, |11>
with index ``i * d_B + k`` for ``|i>_A |k>_B``.
"""
import numpy as np

__all__ = [
    "DimensionError",
    "NotHermitianError",
    "DegenerateStateError",
    "tensor_product",
    "partial_transpose",
    "partial_inner",
    "partial_trace",
    "jacobi_eigh",
    "hermitian_eigenvalues",
    "singular_values",
    "reshuffle",
    "operator_schmidt_rank",
    "schmidt_coefficients",
]

JACOBI_TOL = 1e-14
HERMITIAN_TOL = 1e-10


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class DegenerateStateError(ValueError):
    pass


def _as_complex(m):
    return np.asarray(m, dtype=np.complex128)


def _check_bipartite(op, dims):
    d_a, d_b = dims
    op = _as_complex(op)
    if op.ndim != 2 or op.shape != (d_a * d_b, d_a * d_b):
        raise DimensionError(
            f"expected a square matrix of size {d_a * d_b}, got shape {op.shape}"
        )
    return op


def tensor_product(a, b):
    """Kronecker product with A as the left (slow) index."""
    return np.kron(_as_complex(a), _as_complex(b))


def partial_transpose(rho, dims, subsystem="B"):
    """Transpose the chosen tensor factor of a bipartite operator.

    ``<i,k| rho^{T_B} |j,l> = <i,l| rho |j,k>``; the A case swaps i and j.
    """
    d_a, d_b = dims
    rho = _check_bipartite(rho, dims)
    r = rho.reshape(d_a, d_b, d_a, d_b)
    if subsystem == "B":
        r = r.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        r = r.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', not {subsystem!r}")
    return np.ascontiguousarray(r).reshape(d_a * d_b, d_a * d_b)


def partial_inner(op, phi, subsystem="A"):
    """Partially reduced operator of ``op`` against a pure state of one factor.

    With ``subsystem="A"`` the B factor is contracted with ``phi`` and the
    result acts on A:  ``(F)_A = <phi|F|phi> / <phi|phi>``.  ``subsystem="B"``
    contracts A instead.  The other dimension is inferred from ``op``.
    """
    op = _as_complex(op)
    phi = _as_complex(phi).ravel()
    n = op.shape[0]
    d_phi = phi.shape[0]
    if op.ndim != 2 or op.shape[1] != n or d_phi == 0 or n % d_phi:
        raise DimensionError(
            f"cannot contract a {op.shape} operator with a vector of length {d_phi}"
        )
    norm2 = float(np.vdot(phi, phi).real)
    if not norm2 > 0.0:
        raise DegenerateStateError("contraction vector has zero norm")
    d_keep = n // d_phi
    if subsystem == "A":
        r = op.reshape(d_keep, d_phi, d_keep, d_phi)
        out = np.einsum("k,ikjl,l->ij", phi.conj(), r, phi)
    elif subsystem == "B":
        r = op.reshape(d_phi, d_keep, d_phi, d_keep)
        out = np.einsum("i,ikjl,j->kl", phi.conj(), r, phi)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', not {subsystem!r}")
    return out / norm2


def partial_trace(rho, dims, keep="A"):
    d_a, d_b = dims
    r = _check_bipartite(rho, dims).reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ikjk->ij", r)
    if keep == "B":
        return np.einsum("ikil->kl", r)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def jacobi_eigh(m, tol=JACOBI_TOL, max_sweeps=64):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v)`` with ascending real eigenvalues ``w`` and unitary ``v``
    whose columns are the matching eigenvectors.  Iterates until the
    off-diagonal Frobenius mass falls below ``tol * ||m||_F``.  The sweeps run
    in the selected kernel backend.
    """
    from . import kernels

    a = _as_complex(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    if n and np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise NotHermitianError("matrix is not Hermitian within 1e-10")
    a = np.ascontiguousarray(0.5 * (a + a.conj().T))
    v = np.eye(n, dtype=np.complex128)
    threshold = tol * float(np.linalg.norm(a))
    if not kernels.jacobi_sweeps(a, v, threshold, max_sweeps):
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(m):
    """Ascending eigenvalues of a Hermitian matrix."""
    return jacobi_eigh(m)[0]


def singular_values(m):
    """Singular values (descending) as square roots of eig(m^dagger m)."""
    m = _as_complex(m)
    lam = hermitian_eigenvalues(m.conj().T @ m)
    return np.sqrt(np.clip(lam, 0.0, None))[::-1]


def reshuffle(op, dims):
    """Realignment ``R[(i,j),(k,l)] = op[(i,k),(j,l)]``.

    The singular values of R are the operator Schmidt coefficients of ``op``.
    """
    d_a, d_b = dims
    r = _check_bipartite(op, dims).reshape(d_a, d_b, d_a, d_b)
    return np.ascontiguousarray(r.transpose(0, 2, 1, 3)).reshape(d_a * d_a, d_b * d_b)


def operator_schmidt_rank(op, dims, tol=1e-7):
    """Number of product terms needed to write ``op``; 1 means product form.

    ``tol`` is relative to the largest singular value.  Taking square roots of
    eig(R^dagger R) leaves roughly sqrt(eps) ~ 1e-8 of noise on vanishing
    singular values, so tolerances much below 1e-7 are not meaningful.
    """
    sv = singular_values(reshuffle(op, dims))
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def schmidt_coefficients(psi, dims):
    """Schmidt coefficients (descending, unit 2-norm for normalized psi)."""
    d_a, d_b = dims
    psi = _as_complex(psi).ravel()
    if psi.shape[0] != d_a * d_b:
        raise DimensionError(f"expected a vector of length {d_a * d_b}")
    return singular_values(psi.reshape(d_a, d_b))
