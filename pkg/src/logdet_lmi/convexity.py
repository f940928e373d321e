"""Numerical certification of convexity and strictness of the log-det
objectives.

The lab cannot prove convexity; it certifies *consistency*: seeded random
sweeps must never produce a midpoint-convexity violation beyond a
scale-normalized floor, and strictness is probed through the attained
slack map, which is injective exactly when K is PD.  For rank-deficient K
the sweep constructs explicit tightness witnesses by perturbing sample
points only inside K's numerical null space, where the conjugation by
K^{1/2} makes the objective blind to the change.

All randomness is seed-deterministic: trial i of a sweep depends only on
(seed, i), and every report embeds its seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import CONVEXITY_REL_TOL, STRICT_TIGHT_REL, cone_tol
from .errors import ConeViolationError, LogDetLmiError
from .linalg import Cone, SymmetricMatrix, as_symmetric, classify_cone, sym_eig
from .objective import Kind, evaluate, z_star_f

__all__ = [
    "ConvexityReport",
    "InjectivityReport",
    "SampleConfig",
    "Verdict",
    "Witness",
    "convexity_sweep",
    "hessian_psd_check",
    "midpoint_slack",
    "random_spd",
    "zstar_injectivity_probe",
]

_MAX_STORED_WITNESSES = 32
_WITNESS_MIN_SEP = 0.1
_FLOOR_SAFETY = 1e-3
_SEP_FLOOR = 1e-9


class Verdict(Enum):
    CONVEX_CONSISTENT = "CONVEX_CONSISTENT"
    STRICT_CONSISTENT = "STRICT_CONSISTENT"
    VIOLATION = "VIOLATION"


@dataclass(frozen=True)
class SampleConfig:
    n: int
    trials: int = 200
    seed: int = 0
    condition_cap: float = 100.0
    lambda_grid: tuple[float, ...] = (0.1, 0.25, 0.5, 0.75, 0.9)

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be positive")
        if self.condition_cap < 1.0:
            raise ValueError("condition_cap must be at least 1")
        if not all(0.0 < lam < 1.0 for lam in self.lambda_grid):
            raise ValueError("lambda grid values must be strictly inside (0, 1)")


@dataclass
class Witness:
    x: SymmetricMatrix
    y: SymmetricMatrix
    slack: float


@dataclass
class ConvexityReport:
    trials: int
    worst_violation: float
    strictness_witnesses: list[Witness]
    verdict: Verdict
    seed: int
    tolerance: float
    strictness_floor: float | None


@dataclass
class InjectivityReport:
    injective: bool
    k_is_pd: bool
    min_separation: float
    collision: Witness | None
    trials: int
    seed: int


def random_spd(n: int, seed, condition_cap: float = 100.0) -> SymmetricMatrix:
    """Seed-deterministic random PD matrix with condition number <= cap.

    A log-uniform eigenvalue draw (times a random overall scale) is
    conjugated by a random orthogonal matrix.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    if condition_cap < 1.0:
        raise ValueError("condition_cap must be at least 1")
    rng = np.random.default_rng(seed)
    lam = np.exp(rng.uniform(0.0, np.log(condition_cap), size=n))
    lam *= np.exp(rng.uniform(-1.0, 1.0))
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diagonal(r))
    return SymmetricMatrix((q * lam) @ q.T)


def midpoint_slack(kind: Kind, K, X, Y, lam: float) -> float:
    """lam*h(X) + (1-lam)*h(Y) - h(lam X + (1-lam) Y); convexity predicts >= 0."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must be strictly inside (0, 1)")
    K = as_symmetric(K)
    X = as_symmetric(X)
    Y = as_symmetric(Y)
    mix = SymmetricMatrix(lam * X.a + (1.0 - lam) * Y.a)
    return (
        lam * evaluate(kind, K, X)
        + (1.0 - lam) * evaluate(kind, K, Y)
        - evaluate(kind, K, mix)
    )


def _null_direction_pair(K: SymmetricMatrix, rng) -> tuple | None:
    """A pair X != Y the f-objective cannot tell apart: both diagonal in K's
    eigenbasis, differing only in coordinates of numerically zero eigenvalues.
    """
    w, v = sym_eig(K)
    thresh = cone_tol() * (1.0 + float(np.max(np.abs(w))))
    null = np.flatnonzero(w <= thresh)
    if null.size == 0:
        return None
    d = rng.uniform(0.5, 1.5, size=K.n)
    d2 = d.copy()
    d2[null] += rng.uniform(1.0, 2.0, size=null.size)
    x = SymmetricMatrix((v * d) @ v.T)
    y = SymmetricMatrix((v * d2) @ v.T)
    return x, y


def convexity_sweep(kind: Kind, K, cfg: SampleConfig) -> ConvexityReport:
    """Seeded midpoint-convexity sweep over random PD pairs.

    worst_violation is the most negative scale-normalized slack observed
    (scale = 1 + |h(X)| + |h(Y)|).  When strictness is expected (kind G
    always, kind F for PD K) slacks must clear a data-derived floor
    c * ||X - Y||^2; pairs failing it, or with slack numerically zero,
    are collected as strictness witnesses.  For rank-deficient K the sweep
    appends constructed null-direction pairs, which land in the witness
    list by design.
    """
    K = as_symmetric(K)
    membership = classify_cone(K)
    expect_strict = kind is Kind.G or membership.classification is Cone.PD

    records = []

    def run_pair(x, y):
        fx = evaluate(kind, K, x)
        fy = evaluate(kind, K, y)
        scale = 1.0 + abs(fx) + abs(fy)
        slacks = []
        for lam in cfg.lambda_grid:
            mix = SymmetricMatrix(lam * x.a + (1.0 - lam) * y.a)
            slacks.append(lam * fx + (1.0 - lam) * fy - evaluate(kind, K, mix))
        sep2 = float(np.sum((x.a - y.a) ** 2))
        records.append((x, y, sep2, min(slacks), max(slacks), scale))

    for i in range(cfg.trials):
        x = random_spd(cfg.n, [cfg.seed, i, 1], cfg.condition_cap)
        y = random_spd(cfg.n, [cfg.seed, i, 2], cfg.condition_cap)
        run_pair(x, y)
    n_random = len(records)

    if kind is Kind.F and membership.classification is not Cone.PD:
        for i in range(max(1, cfg.trials // 100)):
            pair = _null_direction_pair(K, np.random.default_rng([cfg.seed, i, 3]))
            if pair is not None:
                run_pair(*pair)

    worst = min(smin / scale for (_, _, _, smin, _, scale) in records)

    pilot = records[: min(n_random, max(10, n_random // 10))]
    ratios = [
        smin / sep2
        for (_, _, sep2, smin, _, _) in pilot
        if sep2 > 0.0 and smin > 0.0
    ]
    floor = _FLOOR_SAFETY * min(ratios) if ratios else None

    witnesses: list[Witness] = []
    for x, y, sep2, smin, smax, scale in records:
        if sep2 < _WITNESS_MIN_SEP**2:
            continue
        tight = smax <= STRICT_TIGHT_REL * scale
        below_floor = floor is not None and smin < floor * sep2
        if tight or below_floor:
            if len(witnesses) < _MAX_STORED_WITNESSES:
                witnesses.append(Witness(x, y, smin))

    if worst < -CONVEXITY_REL_TOL:
        verdict = Verdict.VIOLATION
    elif expect_strict and not witnesses:
        verdict = Verdict.STRICT_CONSISTENT
    else:
        verdict = Verdict.CONVEX_CONSISTENT
    return ConvexityReport(
        trials=len(records),
        worst_violation=worst,
        strictness_witnesses=witnesses,
        verdict=verdict,
        seed=cfg.seed,
        tolerance=CONVEXITY_REL_TOL,
        strictness_floor=floor,
    )


def zstar_injectivity_probe(
    K, trials: int = 100, seed: int = 0, condition_cap: float = 100.0
) -> InjectivityReport:
    """Probe whether the attained slack map X -> Zf*(X) separates points.

    Injectivity holds exactly for PD K; for rank-deficient K a collision
    pair is constructed explicitly when random sampling does not find one.
    """
    K = as_symmetric(K)
    membership = classify_cone(K)
    min_sep = np.inf
    collision = None
    for i in range(trials):
        x = random_spd(K.n, [seed, i, 11], condition_cap)
        y = random_spd(K.n, [seed, i, 12], condition_cap)
        sep = float(np.linalg.norm(z_star_f(K, x).a - z_star_f(K, y).a))
        min_sep = min(min_sep, sep)
        if sep <= _SEP_FLOOR and collision is None:
            collision = Witness(x, y, sep)
    if membership.classification is not Cone.PD and collision is None:
        pair = _null_direction_pair(K, np.random.default_rng([seed, 0, 13]))
        if pair is not None:
            x, y = pair
            sep = float(np.linalg.norm(z_star_f(K, x).a - z_star_f(K, y).a))
            min_sep = min(min_sep, sep)
            if sep <= _SEP_FLOOR:
                collision = Witness(x, y, sep)
    return InjectivityReport(
        injective=collision is None and min_sep > _SEP_FLOOR,
        k_is_pd=membership.classification is Cone.PD,
        min_separation=float(min_sep),
        collision=collision,
        trials=trials,
        seed=seed,
    )


def hessian_psd_check(
    kind: Kind, K, X, directions: int = 20, h: float = 1e-4, seed: int = 0
) -> float:
    """Minimum second central difference of the objective over random
    symmetric unit directions; convexity predicts values above the
    negativity allowance.

    The step shrinks per direction so X +/- h D stays PD; directions that
    still violate the cone are skipped.
    """
    K = as_symmetric(K)
    X = as_symmetric(X)
    lam_min = float(sym_eig(X)[0][0])
    if lam_min <= 0.0:
        raise ConeViolationError(
            f"X must be PD, min eigenvalue {lam_min:.6g}", min_eigenvalue=lam_min
        )
    base = evaluate(kind, K, X)
    values = []
    for k in range(directions):
        rng = np.random.default_rng([seed, k, 21])
        d = rng.standard_normal((X.n, X.n))
        d = 0.5 * (d + d.T)
        d /= np.linalg.norm(d)
        hk = min(h, 0.5 * lam_min)  # spectral norm of d is at most 1
        try:
            up = evaluate(kind, K, SymmetricMatrix(X.a + hk * d))
            down = evaluate(kind, K, SymmetricMatrix(X.a - hk * d))
        except ConeViolationError:
            continue
        values.append((up - 2.0 * base + down) / hk**2)
    if not values:
        raise LogDetLmiError("every probe direction left the PD cone")
    return min(values)
