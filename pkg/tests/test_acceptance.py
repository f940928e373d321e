"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Everything is seeded; tolerances are fixed here, not tuned.
"""

import math
import time

import numpy as np
import pytest

from logdet_lmi import (
    Const,
    Kind,
    LmiConstraint,
    Neg,
    SampleConfig,
    Status,
    Structure,
    Sum,
    SymmetricMatrix,
    Var,
    Verdict,
    assemble,
    combine_assignments,
    convexity_sweep,
    eval_f,
    eval_g,
    evaluate,
    fd_directional,
    grad_f,
    grad_g,
    hessian_psd_check,
    lift_f,
    lift_g,
    logdet_pd,
    midpoint_slack,
    random_spd,
    solve_constrained,
    solve_lifted,
    z_star_f,
    z_star_g,
    zstar_injectivity_probe,
)
from logdet_lmi.convexity import Witness  # noqa: F401  (report shape check)
from conftest import rand_pd, rand_psd_rankdef, rand_sym

SEED = 1234


def _trial_matrices(rng, i):
    n = int(rng.integers(1, 5))
    if i % 4 == 0:
        k = SymmetricMatrix(rand_psd_rankdef(n, max(1, n - 1), rng).a)
    else:
        k = rand_pd(n, rng, scale=float(rng.uniform(0.3, 2.0)))
    x = rand_pd(n, rng, scale=float(rng.uniform(0.3, 2.0)))
    return k, x


@pytest.fixture(scope="module")
def lifted_trials():
    """100 seeded (K, X) pairs solved through the lift for both kinds."""
    rng = np.random.default_rng(SEED)
    records = []
    elapsed = 0.0
    for i in range(100):
        k, x = _trial_matrices(rng, i)
        for kind, ev in ((Kind.F, eval_f), (Kind.G, eval_g)):
            value = ev(k, x)
            t0 = time.monotonic()
            sol = solve_lifted(kind, k, x)
            elapsed += time.monotonic() - t0
            assert sol.status is Status.OPTIMAL
            records.append((kind, k, x, value, sol))
    return records, elapsed


def test_ac1_sdp_value_equals_function(lifted_trials):
    records, elapsed = lifted_trials
    assert len(records) == 200
    for kind, k, x, value, sol in records:
        assert abs(sol.objective - value) <= 1e-5 * (1.0 + abs(value)), (
            f"{kind}: lifted {sol.objective} vs direct {value}"
        )
    assert elapsed < 30.0, f"lifted solves took {elapsed:.1f}s"
    print(f"\nAC-1 SDP value equals function (200 solves, {elapsed:.1f}s): PASS")


def test_ac2_closed_form_minimizer(lifted_trials):
    records, _ = lifted_trials
    for kind, k, x, value, sol in records:
        zs = z_star_f(k, x) if kind is Kind.F else z_star_g(k, x)
        assert -logdet_pd(zs) == pytest.approx(value, abs=1e-8)
        assert np.max(np.abs(sol.assignment["Z"].a - zs.a)) <= 1e-5
    print("AC-2 closed-form minimizer attained and matched by solver: PASS")


def test_ac3_convexity_sweeps():
    rng = np.random.default_rng(SEED + 3)
    n = 3
    ks = {
        "zero": SymmetricMatrix.zeros(n),
        "identity": SymmetricMatrix.identity(n),
        "rank_deficient": rand_psd_rankdef(n, n - 1, rng),
        "pd": rand_pd(n, rng),
    }
    for kind in (Kind.F, Kind.G):
        for label, k in ks.items():
            report = convexity_sweep(
                kind, k, SampleConfig(n=n, trials=500, seed=SEED + 3)
            )
            assert report.verdict is not Verdict.VIOLATION, (
                f"{kind} {label}: worst normalized slack {report.worst_violation}"
            )
            assert report.worst_violation >= -1e-7
    print("AC-3 convexity sweeps clean (8 configurations x 500 trials): PASS")


def test_ac4_strictness_dichotomy():
    for seed in range(20):
        k = random_spd(3, [SEED + 4, seed], 100.0)
        report = zstar_injectivity_probe(k, trials=40, seed=seed)
        assert report.injective and report.k_is_pd

    k = SymmetricMatrix.diagonal([1.0, 0.0])
    report = zstar_injectivity_probe(k, trials=40, seed=0)
    assert not report.injective
    assert report.collision is not None

    x = SymmetricMatrix.diagonal([1.0, 1.0])
    y = SymmetricMatrix.diagonal([1.0, 5.0])
    assert np.allclose(z_star_f(k, x).a, z_star_f(k, y).a)
    assert abs(midpoint_slack(Kind.F, k, x, y, 0.5)) <= 1e-10
    print("AC-4 strictness dichotomy (20 PD probes + explicit collision): PASS")


def test_ac5_constrained_maxdet():
    x1 = Var("X", 1)
    box = LmiConstraint(
        [
            [Sum((Const([[2.0]]), Neg(x1))), None],
            [None, Sum((x1, Const([[-0.5]])))],
        ],
        name="box",
    )
    # oracle: the gradient of g is negative definite, so the optimum sits
    # at the upper box edge x = 2
    assert np.linalg.eigvalsh(grad_g([[1.0]], [[1.0]]).a)[-1] < 0.0
    sol = solve_constrained(Kind.G, [[1.0]], box)
    assert sol.status is Status.OPTIMAL
    assert sol.assignment["X"].a[0, 0] == pytest.approx(2.0, abs=1e-4)
    assert sol.objective == pytest.approx(math.log(1.5), abs=1e-5)

    x2 = Var("X", 2)
    cap = LmiConstraint([[Sum((Const(2.0 * np.eye(2)), Neg(x2)))]], name="cap")
    diag_sol = solve_constrained(
        Kind.F, SymmetricMatrix.identity(2), cap, structure=Structure.DIAGONAL
    )
    assert diag_sol.status is Status.OPTIMAL
    cap1 = LmiConstraint([[Sum((Const([[2.0]]), Neg(x1)))]], name="cap1")
    scalar = solve_constrained(Kind.F, [[1.0]], cap1)
    xs = diag_sol.assignment["X"].a
    for i in range(2):
        assert xs[i, i] == pytest.approx(scalar.assignment["X"].a[0, 0], abs=1e-4)
    assert diag_sol.objective == pytest.approx(2.0 * scalar.objective, abs=1e-4)
    print("AC-5 constrained MaxDet (scalar box and diagonal variant): PASS")


def test_ac6_gradient_fidelity():
    rng = np.random.default_rng(SEED + 6)
    for trial in range(50):
        n = int(rng.integers(1, 5))
        k = rand_psd_rankdef(n, int(rng.integers(1, n + 1)), rng)
        x = rand_pd(n, rng)
        d = rand_sym(n, rng).a
        d = d / np.linalg.norm(d)
        for kind, grad in ((Kind.F, grad_f), (Kind.G, grad_g)):
            analytic = float(np.sum(grad(k, x).a * d))
            fd = fd_directional(kind, k, x, d)
            assert analytic == pytest.approx(fd, rel=1e-4, abs=1e-9)
    for seed in range(10):
        n = int(rng.integers(1, 5))
        k = random_spd(n, [SEED + 6, seed], 50.0)
        x = random_spd(n, [SEED + 7, seed], 50.0)
        for kind in (Kind.F, Kind.G):
            assert (
                hessian_psd_check(kind, k, x, directions=15, h=1e-4, seed=seed)
                >= -1e-4
            )
    print("AC-6 gradients match finite differences; Hessian forms >= -1e-4: PASS")


def test_ac7_sylvester_identity():
    from logdet_lmi import sylvester_check

    rng = np.random.default_rng(SEED + 7)
    for trial in range(200):
        n = int(rng.integers(1, 6))
        rank = int(rng.integers(0, n + 1))
        k = (
            SymmetricMatrix.zeros(n)
            if rank == 0
            else rand_psd_rankdef(n, rank, rng, scale=float(rng.uniform(0.2, 3.0)))
        )
        x = rand_pd(n, rng, scale=float(rng.uniform(0.2, 3.0)))
        lhs, rhs = sylvester_check(k, x)
        assert abs(lhs - rhs) <= 1e-8 * (1.0 + abs(lhs))
    print("AC-7 determinant identity holds on 200 trials incl. singular K: PASS")


def test_ac8_assembly_commutes_with_convex_combinations():
    rng = np.random.default_rng(SEED + 8)
    for trial in range(40):
        n = int(rng.integers(1, 4))
        k = rand_psd_rankdef(n, int(rng.integers(1, n + 1)), rng)
        lift = lift_f(k) if trial % 2 == 0 else lift_g(k)
        a = {"X": rand_pd(n, rng), "Z": rand_pd(n, rng)}
        b = {"X": rand_pd(n, rng), "Z": rand_pd(n, rng)}
        lam = float(rng.uniform(0.0, 1.0))
        mixed = assemble(lift.constraint, combine_assignments(a, b, lam)).a
        direct = (
            lam * assemble(lift.constraint, a).a
            + (1.0 - lam) * assemble(lift.constraint, b).a
        )
        assert np.max(np.abs(mixed - direct)) <= 1e-12
    print("AC-8 assembly commutes with convex combinations to 1e-12: PASS")
