"""Dense real symmetric linear algebra primitives.

Everything downstream (objective evaluation, LMI assembly, the interior
point solver) works on immutable :class:`SymmetricMatrix` values produced
here.  All routines are pure functions over small dense matrices; LAPACK,
through numpy and scipy, does the factorization work.

Complex Hermitian input is out of scope.  When needed, a Hermitian matrix
A + iB embeds losslessly as the 2n x 2n real symmetric block matrix
[[A, -B], [B, A]]; the embedding doubles eigenvalue multiplicities but
preserves definiteness and every cone relation this package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .config import SQRT_CLAMP_REL, cone_tol
from .errors import ConeViolationError, EigenSolveError, ShapeError

__all__ = [
    "Cone",
    "ConeMembership",
    "SymmetricMatrix",
    "as_symmetric",
    "classify_cone",
    "inv_pd",
    "logdet_pd",
    "schur_complement",
    "solve_pd",
    "sqrt_psd",
    "sym_eig",
]


class Cone(Enum):
    PD = "PD"
    PSD = "PSD"
    INDEFINITE = "INDEFINITE"


class SymmetricMatrix:
    """Immutable n x n real symmetric matrix.

    Entries are averaged with their transpose on construction, so asymmetry
    drift from upstream arithmetic never propagates further.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ShapeError("matrix dimension must be at least 1")
        if not np.all(np.isfinite(a)):
            raise ShapeError("matrix entries must be finite")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._a = a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def a(self) -> np.ndarray:
        """Read-only ndarray view of the entries."""
        return self._a

    @property
    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self._a))

    @classmethod
    def identity(cls, n: int) -> "SymmetricMatrix":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, n: int) -> "SymmetricMatrix":
        return cls(np.zeros((n, n)))

    @classmethod
    def diagonal(cls, values) -> "SymmetricMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self._a.astype(dtype)
        return self._a

    def __getitem__(self, key):
        return self._a[key]

    def __eq__(self, other):
        if isinstance(other, SymmetricMatrix):
            return self._a.shape == other._a.shape and bool(
                np.all(self._a == other._a)
            )
        return NotImplemented

    def __repr__(self):
        return f"SymmetricMatrix({self._a.tolist()!r})"


def as_symmetric(value) -> SymmetricMatrix:
    """Coerce an array-like to SymmetricMatrix (no-op for instances)."""
    if isinstance(value, SymmetricMatrix):
        return value
    return SymmetricMatrix(value)


@dataclass(frozen=True)
class ConeMembership:
    min_eigenvalue: float
    classification: Cone
    tolerance_used: float


def sym_eig(A):
    """Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix."""
    A = as_symmetric(A)
    try:
        w, v = np.linalg.eigh(A.a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(
            f"symmetric eigensolver did not converge for matrix\n{A.a!r}"
        ) from exc
    return w, v


def classify_cone(A, tol: float | None = None) -> ConeMembership:
    """Classify a symmetric matrix against the PSD cone.

    PD needs the smallest eigenvalue strictly above ``tol``, PSD allows it
    down to ``-tol``, anything lower is INDEFINITE.  With tol=None the
    global cone tolerance applies.
    """
    A = as_symmetric(A)
    if tol is None:
        tol = cone_tol()
    if tol < 0:
        raise ValueError("cone tolerance must be nonnegative")
    w, _ = sym_eig(A)
    lo = float(w[0])
    if lo > tol:
        classification = Cone.PD
    elif lo >= -tol:
        classification = Cone.PSD
    else:
        classification = Cone.INDEFINITE
    return ConeMembership(lo, classification, float(tol))


def sqrt_psd(K, tol: float | None = None) -> SymmetricMatrix:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues below the clamping threshold are zeroed before taking the
    root, so PSD inputs that arrive with rounding noise stay usable.  The
    threshold defaults to SQRT_CLAMP_REL times the largest |eigenvalue|,
    floored by the global cone tolerance so that anything classify_cone
    accepts as PSD is accepted here too.
    """
    K = as_symmetric(K)
    w, v = sym_eig(K)
    thresh = (
        tol
        if tol is not None
        else max(SQRT_CLAMP_REL * float(np.max(np.abs(w))), cone_tol())
    )
    if w[0] < -thresh:
        raise ConeViolationError(
            f"matrix is not PSD within tolerance {thresh:g}: "
            f"min eigenvalue {w[0]:.6g}",
            min_eigenvalue=float(w[0]),
        )
    w = np.where(w < thresh, 0.0, w)
    return SymmetricMatrix((v * np.sqrt(w)) @ v.T)


def logdet_pd(A) -> float:
    """log det of a PD matrix from its Cholesky factor.

    Works on the sum of factor log-diagonals, never on the raw determinant,
    so large well-conditioned matrices cannot overflow.
    """
    A = as_symmetric(A)
    try:
        L = np.linalg.cholesky(A.a)
    except np.linalg.LinAlgError:
        lo = float(np.linalg.eigvalsh(A.a)[0])
        raise ConeViolationError(
            f"matrix is not positive definite: min eigenvalue {lo:.6g}",
            min_eigenvalue=lo,
        ) from None
    return float(2.0 * np.sum(np.log(np.diagonal(L))))


def solve_pd(A, B) -> np.ndarray:
    """Solve A X = B for PD A via Cholesky."""
    A = as_symmetric(A)
    b = np.asarray(B, dtype=np.float64)
    if b.ndim not in (1, 2) or b.shape[0] != A.n:
        raise ShapeError(
            f"right-hand side of shape {b.shape} does not match dimension {A.n}"
        )
    try:
        factor = cho_factor(A.a, lower=True)
    except np.linalg.LinAlgError:
        lo = float(np.linalg.eigvalsh(A.a)[0])
        raise ConeViolationError(
            f"matrix is not positive definite: min eigenvalue {lo:.6g}",
            min_eigenvalue=lo,
        ) from None
    return cho_solve(factor, b)


def inv_pd(A) -> np.ndarray:
    """Inverse of a PD matrix, symmetrized."""
    A = as_symmetric(A)
    inv = solve_pd(A, np.eye(A.n))
    return 0.5 * (inv + inv.T)


def schur_complement(M, split: int) -> SymmetricMatrix:
    """Leading-block Schur complement A - B C^-1 B^T of [[A, B], [B^T, C]].

    ``split`` is the size of the leading block A; the trailing block C must
    be PD.
    """
    M = as_symmetric(M)
    if not 1 <= split < M.n:
        raise ShapeError(f"split {split} invalid for dimension {M.n}")
    a = M.a[:split, :split]
    b = M.a[:split, split:]
    c = M.a[split:, split:]
    try:
        factor = cho_factor(c, lower=True)
    except np.linalg.LinAlgError:
        lo = float(np.linalg.eigvalsh(c)[0])
        raise ConeViolationError(
            f"trailing block is not positive definite: min eigenvalue {lo:.6g}",
            min_eigenvalue=lo,
        ) from None
    return SymmetricMatrix(a - b @ cho_solve(factor, b.T))
