"""The two log-det objectives, their attained minimizers and gradients.

For K PSD and X PD:

    f(X) = log det(I + K X^-1)
    g(X) = log det(K + X^-1)

f is evaluated as log det(X + K) - log det(X), which is algebraically the
same but keeps every factorization symmetric PD; the non-symmetric product
K X^-1 is never formed.  Both functions admit a slack matrix whose negative
log-determinant attains the function value:

    Zf*(X) = I - K^{1/2} (X + K)^-1 K^{1/2}
    Zg*(X) = (K + X^-1)^-1

Analytic gradients come with a central-difference hook for validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import FD_STEP_REL
from .errors import ConeViolationError, ShapeError
from .linalg import (
    Cone,
    SymmetricMatrix,
    as_symmetric,
    classify_cone,
    inv_pd,
    logdet_pd,
    solve_pd,
    sqrt_psd,
)

__all__ = [
    "Kind",
    "LogDetObjective",
    "eval_f",
    "eval_g",
    "evaluate",
    "fd_directional",
    "grad_f",
    "grad_g",
    "gradient",
    "sylvester_check",
    "z_star",
    "z_star_f",
    "z_star_g",
]


class Kind(Enum):
    F = "F"
    G = "G"


def _check_pair(K, X):
    K = as_symmetric(K)
    X = as_symmetric(X)
    if K.n != X.n:
        raise ShapeError(f"dimension mismatch: K is {K.n}x{K.n}, X is {X.n}x{X.n}")
    return K, X


def eval_f(K, X) -> float:
    """log det(I + K X^-1), evaluated as log det(X + K) - log det(X)."""
    K, X = _check_pair(K, X)
    base = logdet_pd(X)
    return logdet_pd(SymmetricMatrix(X.a + K.a)) - base


def eval_g(K, X) -> float:
    """log det(K + X^-1) with the sum explicitly symmetrized."""
    K, X = _check_pair(K, X)
    return logdet_pd(SymmetricMatrix(K.a + inv_pd(X)))


def evaluate(kind: Kind, K, X) -> float:
    return eval_f(K, X) if kind is Kind.F else eval_g(K, X)


def sylvester_check(K, X) -> tuple[float, float]:
    """Both sides of log det(I + K X^-1) == log det(I + K^{1/2} X^-1 K^{1/2}).

    Returns (lhs, rhs); agreement is the caller's assertion.
    """
    K, X = _check_pair(K, X)
    lhs = eval_f(K, X)
    s = sqrt_psd(K)
    inner = s.a @ solve_pd(X, s.a)
    rhs = logdet_pd(SymmetricMatrix(np.eye(K.n) + inner))
    return lhs, rhs


def z_star_f(K, X) -> SymmetricMatrix:
    """The attained slack for f: I - K^{1/2} (X + K)^-1 K^{1/2}, always PD."""
    K, X = _check_pair(K, X)
    s = sqrt_psd(K)
    w = solve_pd(SymmetricMatrix(X.a + K.a), s.a)
    return SymmetricMatrix(np.eye(K.n) - s.a @ w)


def z_star_g(K, X) -> SymmetricMatrix:
    """The attained slack for g: (K + X^-1)^-1."""
    K, X = _check_pair(K, X)
    m = SymmetricMatrix(K.a + inv_pd(X))
    return SymmetricMatrix(inv_pd(m))


def z_star(kind: Kind, K, X) -> SymmetricMatrix:
    return z_star_f(K, X) if kind is Kind.F else z_star_g(K, X)


def grad_f(K, X) -> SymmetricMatrix:
    """Gradient of f: (X + K)^-1 - X^-1, negative semidefinite."""
    K, X = _check_pair(K, X)
    return SymmetricMatrix(inv_pd(SymmetricMatrix(X.a + K.a)) - inv_pd(X))


def grad_g(K, X) -> SymmetricMatrix:
    """Gradient of g: -(X + X K X)^-1, negative definite."""
    K, X = _check_pair(K, X)
    m = SymmetricMatrix(X.a + X.a @ K.a @ X.a)
    return SymmetricMatrix(-inv_pd(m))


def gradient(kind: Kind, K, X) -> SymmetricMatrix:
    return grad_f(K, X) if kind is Kind.F else grad_g(K, X)


def fd_directional(kind: Kind, K, X, direction, step: float | None = None) -> float:
    """Central-difference directional derivative of f or g along a symmetric
    direction; the validation hook the analytic gradients are checked against.

    The step shrinks (at most 40 halvings) if a perturbed point leaves the
    PD cone.
    """
    K, X = _check_pair(K, X)
    d = np.asarray(direction, dtype=np.float64)
    d = 0.5 * (d + d.T)
    h = step if step is not None else FD_STEP_REL * (1.0 + X.norm)
    for _ in range(40):
        try:
            up = evaluate(kind, K, SymmetricMatrix(X.a + h * d))
            down = evaluate(kind, K, SymmetricMatrix(X.a - h * d))
            return (up - down) / (2.0 * h)
        except ConeViolationError:
            h *= 0.5
    raise ConeViolationError(
        "finite-difference step could not be shrunk to keep X +/- h D positive definite"
    )


@dataclass(frozen=True)
class LogDetObjective:
    """A (kind, K) pair with K checked against the PSD cone on construction."""

    kind: Kind
    K: SymmetricMatrix

    def __post_init__(self):
        object.__setattr__(self, "K", as_symmetric(self.K))
        membership = classify_cone(self.K)
        if membership.classification is Cone.INDEFINITE:
            raise ConeViolationError(
                "objective requires K PSD: "
                f"min eigenvalue {membership.min_eigenvalue:.6g}",
                min_eigenvalue=membership.min_eigenvalue,
            )

    @property
    def n(self) -> int:
        return self.K.n

    def value(self, X) -> float:
        return evaluate(self.kind, self.K, X)

    def gradient(self, X) -> SymmetricMatrix:
        return gradient(self.kind, self.K, X)

    def z_star(self, X) -> SymmetricMatrix:
        return z_star(self.kind, self.K, X)
