"""Log-barrier interior-point solver for small dense determinant
maximization problems over block LMI constraints.

Problem form:

    minimize    -log det Z
    subject to  LMI_j(vars) >= 0     (affine, PSD)
                V > 0 for V in pd_vars (Z is always among them)

The solver follows the central path of

    t * (-log det Z) - sum_j log det LMI_j(x) - sum_V log det V(x)

with damped Newton centering: Armijo backtracking (alpha 0.25, beta 0.5)
that rejects any step where a barrier argument loses its Cholesky factor,
then t grows by a fixed factor until m_total / t, the total barrier
dimension over t, drops below the duality gap tolerance.  Matrix
variables are flattened to their upper triangle (diagonal entries only
for DIAGONAL-structured variables) and the Newton system is assembled
densely; sizes stay at desk scale, so correctness and robustness win over
sparsity tricks.

Feasible starts come from a phase-1 solve that minimizes s subject to
every barrier argument plus s*I staying PSD, stopping as soon as s drops
below the negated feasibility shift.  Lifted problems with a known PD X
skip phase 1 via the analytic slack warm start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import BindingError, ShapeError, SolveError
from .kernels import affine_assemble, barrier_grad_hess
from .lmi import (
    LmiConstraint,
    VAR_X,
    VAR_Z,
    assemble,
    feasibility_margin,
    lift_for,
    substitute_constraint,
)
from .linalg import SymmetricMatrix, as_symmetric, sym_eig
from .objective import Kind, z_star

__all__ = [
    "MaxDetProblem",
    "PhaseOneResult",
    "Solution",
    "SolverOptions",
    "Status",
    "Structure",
    "VariableSpec",
    "phase1",
    "solve",
    "solve_constrained",
    "solve_lifted",
    "solve_lifted_value",
]

_DIVERGE_LIMIT = 1e8
_DEGENERATE_EIG = 1e-8


class Structure(Enum):
    FULL = "FULL"
    DIAGONAL = "DIAGONAL"


class Status(Enum):
    OPTIMAL = "OPTIMAL"
    MAX_ITER = "MAX_ITER"
    INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True)
class VariableSpec:
    name: str
    dim: int
    structure: Structure = Structure.FULL


@dataclass(frozen=True)
class SolverOptions:
    barrier_t0: float = 1.0
    barrier_mu: float = 10.0
    newton_tol: float = 1e-9
    duality_gap_tol: float = 1e-7
    max_outer: int = 60
    max_newton: int = 50
    feasibility_shift: float = 1e-6

    def __post_init__(self):
        positives = (
            self.barrier_t0,
            self.newton_tol,
            self.duality_gap_tol,
            self.max_outer,
            self.max_newton,
            self.feasibility_shift,
        )
        if any(v <= 0 for v in positives):
            raise ValueError("all solver options must be positive")
        if self.barrier_mu <= 1.0:
            raise ValueError("barrier_mu must exceed 1")


@dataclass
class Solution:
    assignment: dict[str, SymmetricMatrix]
    objective: float
    margins: dict[str, float]
    status: Status
    outer_iterations: int
    newton_steps: int
    gap: float = float("nan")
    diagnostics: list[str] = field(default_factory=list)
    path_objectives: list[float] = field(default_factory=list)


@dataclass
class PhaseOneResult:
    feasible: bool
    assignment: dict[str, SymmetricMatrix]
    s_final: float
    outer_iterations: int
    newton_steps: int


@dataclass(frozen=True)
class MaxDetProblem:
    variables: tuple[VariableSpec, ...]
    objective_var: str
    lmis: tuple[LmiConstraint, ...]
    pd_vars: frozenset[str]

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ShapeError("variable names must be unique")
        if self.objective_var not in names:
            raise ShapeError(f"objective variable {self.objective_var!r} not declared")
        if self.objective_var not in self.pd_vars:
            raise ShapeError("objective variable must be in pd_vars")
        if not self.pd_vars <= set(names):
            raise ShapeError("pd_vars must be declared variables")
        dims = {v.name: (v.dim, v.dim) for v in self.variables}
        for lmi in self.lmis:
            for name, dd in lmi.variables().items():
                if name not in dims:
                    raise BindingError(
                        f"LMI {lmi.name!r} references undeclared variable {name!r}"
                    )
                if dims[name] != dd:
                    raise ShapeError(
                        f"LMI {lmi.name!r} uses {name!r} with dims {dd}, "
                        f"declared {dims[name]}"
                    )

    @classmethod
    def create(cls, variables, objective_var, lmis, pd_vars=None):
        """Build a problem from lists; pd_vars always gains the objective."""
        specs = []
        for v in variables:
            if isinstance(v, VariableSpec):
                specs.append(v)
            else:
                name, dim, *rest = v
                structure = rest[0] if rest else Structure.FULL
                specs.append(VariableSpec(name, int(dim), Structure(structure)))
        pd = frozenset(pd_vars or ()) | {objective_var}
        return cls(tuple(specs), objective_var, tuple(lmis), pd)


def _coords(spec: VariableSpec):
    if spec.structure is Structure.DIAGONAL:
        return [(i, i) for i in range(spec.dim)]
    return [(i, j) for i in range(spec.dim) for j in range(i, spec.dim)]


def _basis(n: int, i: int, j: int) -> np.ndarray:
    b = np.zeros((n, n))
    b[i, j] = 1.0
    b[j, i] = 1.0
    return b


class _Term:
    """One barrier argument: base + sum over its coordinates of coeffs."""

    __slots__ = ("name", "base", "coeffs", "idx", "m")

    def __init__(self, name, base, coeffs, idx):
        self.name = name
        self.base = np.ascontiguousarray(base, dtype=np.float64)
        self.coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
        self.idx = np.asarray(idx, dtype=np.intp)
        self.m = self.base.shape[0]

    def matrix(self, x: np.ndarray) -> np.ndarray:
        return affine_assemble(self.base, self.coeffs, x[self.idx])


class _Compiled:
    """Flattened coordinates and barrier terms of a MaxDetProblem."""

    def __init__(self, problem: MaxDetProblem):
        self.problem = problem
        self.coord_list: list[tuple[str, int, int]] = []
        self.var_indices: dict[str, np.ndarray] = {}
        for spec in problem.variables:
            start = len(self.coord_list)
            for (i, j) in _coords(spec):
                self.coord_list.append((spec.name, i, j))
            self.var_indices[spec.name] = np.arange(start, len(self.coord_list))
        self.dim = len(self.coord_list)
        self.specs = {v.name: v for v in problem.variables}

        self.terms: list[_Term] = []
        self.lmi_names: list[str] = []
        used = set()
        for i, lmi in enumerate(problem.lmis):
            name = lmi.name or f"lmi{i}"
            if name in used:
                name = f"{name}#{i}"
            used.add(name)
            self.lmi_names.append(name)
            self.terms.append(self._lmi_term(name, lmi))
        self.obj_term = -1
        for v in problem.variables:
            if v.name in problem.pd_vars:
                term = self._pd_term(v)
                if v.name == problem.objective_var:
                    self.obj_term = len(self.terms)
                self.terms.append(term)
        self.m_total = sum(t.m for t in self.terms)

    def _lmi_term(self, name: str, lmi: LmiConstraint) -> _Term:
        zeros = {v.name: np.zeros((v.dim, v.dim)) for v in self.problem.variables}
        base = np.array(assemble(lmi, zeros).a)
        in_lmi = lmi.variables()
        idx, coeffs = [], []
        for k, (vname, i, j) in enumerate(self.coord_list):
            if vname not in in_lmi:
                continue
            unit = dict(zeros)
            unit[vname] = _basis(self.specs[vname].dim, i, j)
            diff = assemble(lmi, unit).a - base
            if np.any(diff):
                idx.append(k)
                coeffs.append(diff)
        m = base.shape[0]
        stack = np.stack(coeffs) if coeffs else np.zeros((0, m, m))
        return _Term(name, base, stack, idx)

    def _pd_term(self, spec: VariableSpec) -> _Term:
        idx = self.var_indices[spec.name]
        coeffs = np.stack(
            [_basis(spec.dim, i, j) for (_, i, j) in (self.coord_list[k] for k in idx)]
        )
        return _Term(f"pd:{spec.name}", np.zeros((spec.dim, spec.dim)), coeffs, idx)

    def to_vec(self, assignment: Mapping) -> np.ndarray:
        x = np.empty(self.dim)
        for spec in self.problem.variables:
            try:
                value = assignment[spec.name]
            except KeyError:
                raise BindingError(f"assignment misses variable {spec.name!r}") from None
            arr = as_symmetric(value).a
            if arr.shape != (spec.dim, spec.dim):
                raise ShapeError(
                    f"variable {spec.name!r} has shape {arr.shape}, "
                    f"declared {(spec.dim, spec.dim)}"
                )
            if spec.structure is Structure.DIAGONAL:
                off = arr - np.diag(np.diagonal(arr))
                if np.max(np.abs(off)) > 1e-12 * (1.0 + np.max(np.abs(arr))):
                    raise ShapeError(
                        f"variable {spec.name!r} is DIAGONAL but value has "
                        "off-diagonal entries"
                    )
            for k in self.var_indices[spec.name]:
                _, i, j = self.coord_list[k]
                x[k] = arr[i, j]
        return x

    def to_assignment(self, x: np.ndarray) -> dict[str, SymmetricMatrix]:
        out = {}
        for spec in self.problem.variables:
            arr = np.zeros((spec.dim, spec.dim))
            for k in self.var_indices[spec.name]:
                _, i, j = self.coord_list[k]
                arr[i, j] = x[k]
                arr[j, i] = x[k]
            out[spec.name] = SymmetricMatrix(arr)
        return out

    def objective_value(self, x: np.ndarray) -> float:
        out = _chol_logdet(self.terms[self.obj_term].matrix(x))
        return float("inf") if out is None else -out[1]


def _chol_logdet(S: np.ndarray):
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return None
    return L, 2.0 * float(np.sum(np.log(np.diagonal(L))))


def _phi(x, terms, weights, lin):
    """Barrier potential, or None when x is outside the interior."""
    val = float(lin @ x)
    for term, w in zip(terms, weights):
        out = _chol_logdet(term.matrix(x))
        if out is None:
            return None
        val -= w * out[1]
    return val


def _grad_hess(x, terms, weights, lin, dim):
    phi = float(lin @ x)
    g = lin.copy()
    H = np.zeros((dim, dim))
    for term, w in zip(terms, weights):
        out = _chol_logdet(term.matrix(x))
        if out is None:
            raise SolveError(f"iterate left the interior of barrier {term.name!r}")
        L, logdet = out
        phi -= w * logdet
        sinv = cho_solve((L, True), np.eye(term.m))
        sinv = 0.5 * (sinv + sinv.T)
        traces, hess = barrier_grad_hess(sinv, term.coeffs)
        g[term.idx] -= w * traces
        H[np.ix_(term.idx, term.idx)] += w * hess
    return phi, g, H


def _newton_direction(H, g):
    dim = H.shape[0]
    scale = max(float(np.trace(H)) / max(dim, 1), 1.0)
    for bump in (0.0, 1e-13, 1e-10, 1e-7):
        try:
            shifted = H if bump == 0.0 else H + bump * scale * np.eye(dim)
            factor = cho_factor(shifted, lower=True)
            return cho_solve(factor, -g)
        except np.linalg.LinAlgError:
            continue
    return np.linalg.lstsq(H, -g, rcond=None)[0]


def _min_margin(terms: Iterable[_Term], x: np.ndarray) -> float:
    lo = math.inf
    for term in terms:
        lo = min(lo, float(np.linalg.eigvalsh(term.matrix(x))[0]))
    return lo


def _center(x, terms, weights, lin, opts, log_step=None, stop_early=None):
    """Damped Newton until the decrement criterion; returns (x, steps, early)."""
    steps = 0
    for _ in range(opts.max_newton):
        phi, g, H = _grad_hess(x, terms, weights, lin, x.size)
        dx = _newton_direction(H, g)
        dec2 = float(-(g @ dx))
        if log_step is not None:
            log_step(x, dec2)
        if dec2 <= 2.0 * opts.newton_tol:
            break
        gtd = float(g @ dx)
        s = 1.0
        accepted = False
        for _ in range(60):
            cand = x + s * dx
            phi_c = _phi(cand, terms, weights, lin)
            if phi_c is not None and phi_c <= phi + 0.25 * s * gtd:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            break
        x = cand
        steps += 1
        if stop_early is not None and stop_early(x):
            return x, steps, True
    return x, steps, False


def _phase1(comp: _Compiled, opts: SolverOptions, trace=None):
    """Minimize s with every barrier argument shifted by s*I."""
    d = comp.dim
    aug_terms = []
    for t in comp.terms:
        eye = np.eye(t.m)[None]
        coeffs = np.concatenate([t.coeffs, eye]) if t.coeffs.size else eye
        aug_terms.append(_Term(t.name, t.base, coeffs, np.append(t.idx, d)))

    x = np.empty(d + 1)
    x[:d] = comp.to_vec(
        {v.name: SymmetricMatrix.identity(v.dim) for v in comp.problem.variables}
    )
    x[d] = max(0.0, -_min_margin(comp.terms, x[:d])) + 1.0

    delta = opts.feasibility_shift
    weights = np.ones(len(aug_terms))
    m_total = sum(t.m for t in aug_terms)
    lin = np.zeros(d + 1)
    stop = lambda xv: xv[d] < -delta  # noqa: E731

    t = opts.barrier_t0
    total_steps = 0
    outer = 0
    feasible = False
    while outer < opts.max_outer:
        lin[d] = t
        log_step = None
        if trace is not None:
            log_step = _make_logger(trace, t, lambda xv: xv[d], aug_terms)
        x, steps, early = _center(
            x, aug_terms, weights, lin, opts, log_step, stop_early=stop
        )
        total_steps += steps
        outer += 1
        if early or stop(x):
            feasible = True
            break
        if m_total / t < opts.duality_gap_tol:
            break
        t *= opts.barrier_mu
    return PhaseOneResult(
        feasible=feasible,
        assignment=comp.to_assignment(x[:d]),
        s_final=float(x[d]),
        outer_iterations=outer,
        newton_steps=total_steps,
    )


def phase1(problem: MaxDetProblem, opts: SolverOptions | None = None, trace=None):
    """Strictly feasible starting assignment, or an infeasibility report.

    The result is feasible when the slack s could be driven below the
    negated feasibility shift; otherwise s_final is the certificate.
    """
    return _phase1(_Compiled(problem), opts or SolverOptions(), trace)


def _make_logger(trace, t, objective_of, terms):
    def log_step(xv, dec2):
        margin = _min_margin(terms, xv)
        dec = math.sqrt(max(dec2, 0.0))
        trace(
            f"t={t:.6g} obj={objective_of(xv):.9g} dec={dec:.3e} margin={margin:.3e}"
        )

    return log_step


def solve(
    problem: MaxDetProblem,
    opts: SolverOptions | None = None,
    start: Mapping | None = None,
    trace: Callable[[str], None] | None = None,
) -> Solution:
    """Barrier path-following solve of a MaxDetProblem.

    ``start`` may carry a strictly feasible assignment (the analytic warm
    start of the lifted problems); anything else goes through phase 1.
    ``trace`` receives one line per Newton step.
    """
    opts = opts or SolverOptions()
    comp = _Compiled(problem)
    diagnostics: list[str] = []

    phase_outer = 0
    phase_steps = 0
    x = None
    if start is not None:
        cand = comp.to_vec(start)
        if _min_margin(comp.terms, cand) > 0.0:
            x = cand
        else:
            diagnostics.append("provided start is not strictly feasible; ran phase 1")
    if x is None:
        ph = _phase1(comp, opts, trace)
        phase_outer, phase_steps = ph.outer_iterations, ph.newton_steps
        if not ph.feasible:
            margins = {
                name: feasibility_margin(lmi, ph.assignment)
                for name, lmi in zip(comp.lmi_names, problem.lmis)
            }
            diagnostics.append(
                f"phase 1 could not drive the slack below {-opts.feasibility_shift:g}; "
                f"final slack {ph.s_final:.6g}"
            )
            return Solution(
                assignment=ph.assignment,
                objective=float("nan"),
                margins=margins,
                status=Status.INFEASIBLE,
                outer_iterations=phase_outer,
                newton_steps=phase_steps,
                gap=float("nan"),
                diagnostics=diagnostics,
            )
        x = comp.to_vec(ph.assignment)

    lin = np.zeros(comp.dim)
    weights = np.ones(len(comp.terms))
    t = opts.barrier_t0
    status = Status.MAX_ITER
    gap = comp.m_total / t
    path: list[float] = []
    total_steps = phase_steps
    outer = 0
    diverge = lambda xv: float(np.max(np.abs(xv))) > _DIVERGE_LIMIT  # noqa: E731

    while outer < opts.max_outer:
        weights[comp.obj_term] = 1.0 + t
        log_step = None
        if trace is not None:
            log_step = _make_logger(trace, t, comp.objective_value, comp.terms)
        x, steps, early = _center(
            x, comp.terms, weights, lin, opts, log_step, stop_early=diverge
        )
        total_steps += steps
        outer += 1
        path.append(comp.objective_value(x))
        if early:
            diagnostics.append(
                f"iterates exceeded {_DIVERGE_LIMIT:g}; feasible set may be "
                "unbounded or the infimum unattained"
            )
            break
        gap = comp.m_total / t
        if gap < opts.duality_gap_tol:
            status = Status.OPTIMAL
            if trace is not None:
                trace(
                    f"terminated: barrier dimension {comp.m_total} / t {t:.6g} "
                    f"= {gap:.3e} < {opts.duality_gap_tol:g}"
                )
            break
        t *= opts.barrier_mu

    assignment = comp.to_assignment(x)
    margins = {
        name: feasibility_margin(lmi, assignment)
        for name, lmi in zip(comp.lmi_names, problem.lmis)
    }
    if status is Status.OPTIMAL:
        assert gap < opts.duality_gap_tol

    free = [
        k
        for k, (vname, _, _) in enumerate(comp.coord_list)
        if vname != problem.objective_var
    ]
    if free:
        _, _, H = _grad_hess(x, comp.terms, weights, lin, comp.dim)
        lo = float(np.linalg.eigvalsh(H[np.ix_(free, free)])[0])
        if lo < _DEGENERATE_EIG:
            diagnostics.append(
                "Newton Hessian block of the non-objective variables is nearly "
                f"singular (min eigenvalue {lo:.3e}); the optimal X may be non-unique"
            )

    return Solution(
        assignment=assignment,
        objective=comp.objective_value(x),
        margins=margins,
        status=status,
        outer_iterations=outer + phase_outer,
        newton_steps=total_steps,
        gap=gap,
        diagnostics=diagnostics,
        path_objectives=path,
    )


def _warm_start_z(kind: Kind, K, X) -> SymmetricMatrix:
    zs = z_star(kind, K, X)
    lo = float(sym_eig(zs)[0][0])
    return SymmetricMatrix(zs.a - 0.5 * lo * np.eye(zs.n))


def solve_lifted(
    kind: Kind, K, X, opts: SolverOptions | None = None, trace=None
) -> Solution:
    """Solve the lift with X frozen to a constant; only Z remains variable."""
    K = as_symmetric(K)
    X = as_symmetric(X)
    lift = lift_for(kind, K)
    frozen = substitute_constraint(lift.constraint, {VAR_X: X})
    problem = MaxDetProblem.create([(VAR_Z, K.n)], VAR_Z, [frozen])
    return solve(problem, opts, start={VAR_Z: _warm_start_z(kind, K, X)}, trace=trace)


def solve_lifted_value(
    kind: Kind, K, X, opts: SolverOptions | None = None, trace=None
) -> float:
    """Optimal value of the lifted program at frozen X."""
    sol = solve_lifted(kind, K, X, opts, trace)
    if sol.status is not Status.OPTIMAL:
        raise SolveError(f"lifted solve ended with status {sol.status.value}")
    return sol.objective


def solve_constrained(
    kind: Kind,
    K,
    H: LmiConstraint,
    structure: Structure = Structure.FULL,
    opts: SolverOptions | None = None,
    trace=None,
) -> Solution:
    """min f or g over PD X subject to the affine constraint H(X) >= 0,
    via the two-LMI slack formulation with X and Z both variables.
    """
    K = as_symmetric(K)
    n = K.n
    h_vars = H.variables()
    if set(h_vars) - {VAR_X}:
        raise ShapeError(f"H must be affine in {VAR_X!r} only, got {sorted(h_vars)}")
    if VAR_X in h_vars and h_vars[VAR_X] != (n, n):
        raise ShapeError(
            f"H uses {VAR_X!r} with dims {h_vars[VAR_X]}, expected {(n, n)}"
        )
    lift = lift_for(kind, K)
    problem = MaxDetProblem.create(
        [(VAR_X, n, structure), (VAR_Z, n)],
        VAR_Z,
        [H, lift.constraint],
        pd_vars={VAR_X},
    )
    return solve(problem, opts, trace=trace)
