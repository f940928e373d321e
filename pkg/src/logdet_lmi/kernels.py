"""Hot numeric kernels for the barrier solver.

Two operations dominate solver runtime: assembling an affine matrix
function S(x) = base + sum_a x_a * coeffs[a], and building the gradient
and Hessian of -log det S(x) over the flattened coordinates,

    trace_a = tr(S^-1 A_a),
    hess_ab = tr(S^-1 A_a S^-1 A_b).

Both are provided in a numba-compiled and a pure-numpy variant.  The
active backend is chosen at import from the LOGDET_LMI_BACKEND
environment variable ("numba" or "numpy"; default numba when importable)
and can be switched at runtime with :func:`select_backend`.  Both
variants accept C-contiguous float64 arrays and agree to round-off.
"""

import os
import warnings

import numpy as np

from .config import ENV_KERNEL_BACKEND


def _assemble_numpy(base, coeffs, x):
    if coeffs.shape[0] == 0:
        return base.copy()
    return base + np.tensordot(x, coeffs, axes=1)


def _grad_hess_numpy(sinv, coeffs):
    w = np.matmul(sinv, coeffs)
    traces = np.trace(w, axis1=1, axis2=2)
    hess = np.einsum("aij,bji->ab", w, w, optimize=True)
    return traces, 0.5 * (hess + hess.T)


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

if HAVE_NUMBA:

    @njit(cache=True)
    def _assemble_numba(base, coeffs, x):
        k, m, _ = coeffs.shape
        out = base.copy()
        for a in range(k):
            xa = x[a]
            if xa != 0.0:
                for i in range(m):
                    for j in range(m):
                        out[i, j] += xa * coeffs[a, i, j]
        return out

    @njit(cache=True)
    def _grad_hess_numba(sinv, coeffs):
        k, m, _ = coeffs.shape
        w = np.empty((k, m, m))
        traces = np.empty(k)
        for a in range(k):
            tr = 0.0
            for i in range(m):
                for j in range(m):
                    acc = 0.0
                    for l in range(m):
                        acc += sinv[i, l] * coeffs[a, l, j]
                    w[a, i, j] = acc
                tr += w[a, i, i]
            traces[a] = tr
        hess = np.empty((k, k))
        for a in range(k):
            for b in range(a, k):
                acc = 0.0
                for i in range(m):
                    for j in range(m):
                        acc += w[a, i, j] * w[b, j, i]
                hess[a, b] = acc
                hess[b, a] = acc
        return traces, hess


_IMPLS = {"numpy": (_assemble_numpy, _grad_hess_numpy)}
if HAVE_NUMBA:
    _IMPLS["numba"] = (_assemble_numba, _grad_hess_numba)

_active = "numpy"


def available_backends():
    return tuple(sorted(_IMPLS))


def backend_name() -> str:
    return _active


def select_backend(name=None) -> str:
    """Activate a kernel backend; None re-reads the environment flag."""
    global _active
    if name is None:
        name = os.environ.get(ENV_KERNEL_BACKEND, "").strip().lower()
        if not name:
            name = "numba" if HAVE_NUMBA else "numpy"
    name = name.lower()
    if name not in _IMPLS:
        raise ValueError(
            f"unknown kernel backend {name!r}; available: {available_backends()}"
        )
    _active = name
    return _active


def affine_assemble(base, coeffs, x):
    """base + sum_a x[a] * coeffs[a] for a (k, m, m) coefficient stack."""
    base = np.ascontiguousarray(base, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    return _IMPLS[_active][0](base, coeffs, x)


def barrier_grad_hess(sinv, coeffs):
    """Trace vector and Hessian of the log-det barrier at inverse sinv."""
    sinv = np.ascontiguousarray(sinv, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    if coeffs.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0))
    return _IMPLS[_active][1](sinv, coeffs)


try:
    select_backend()
except ValueError as exc:  # bad env value: fall back rather than break import
    warnings.warn(f"{exc}; falling back to default backend")
    select_backend("numba" if HAVE_NUMBA else "numpy")
