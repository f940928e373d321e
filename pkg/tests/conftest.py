import numpy as np
import pytest

from logdet_lmi import SymmetricMatrix


def rand_pd(n, rng, scale=1.0):
    """Random PD matrix: Q diag(lam) Q', eigenvalues in [0.3, 3.3] * scale."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diagonal(r))
    lam = scale * rng.uniform(0.3, 3.3, size=n)
    return SymmetricMatrix((q * lam) @ q.T)


def rand_psd_rankdef(n, rank, rng, scale=1.0):
    """Random PSD matrix of the given rank (B B' with B of shape (n, rank))."""
    b = rng.standard_normal((n, rank))
    return SymmetricMatrix(scale * b @ b.T)


def rand_sym(n, rng, scale=1.0):
    a = rng.standard_normal((n, n))
    return SymmetricMatrix(scale * 0.5 * (a + a.T))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
