"""Select the kernel backend (trajectory loops and Jacobi sweeps).

The compiled extension is used when importable; set ``SEPLIND_BACKEND=python``
to force the numpy fallback.
"""
import os

from . import _pykernels

__all__ = ["BACKEND", "full_trajectory", "separable_trajectory", "jacobi_sweeps", "get_backend"]


def get_backend(name=None):
    """Return ``(name, module)`` for the requested or best available backend."""
    name = name or os.environ.get("SEPLIND_BACKEND", "auto")
    if name not in ("auto", "compiled", "python"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name in ("auto", "compiled"):
        try:
            from . import _kernels
        except ImportError:
            if name == "compiled":
                raise
        else:
            return "compiled", _kernels
    return "python", _pykernels


BACKEND, _impl = get_backend()
full_trajectory = _impl.full_trajectory
separable_trajectory = _impl.separable_trajectory
jacobi_sweeps = _impl.jacobi_sweeps
