"""Command-line front end.

    logdet-lmi <eval|lift|solve|verify> --input <file> [--trace]
               [--json <path>] [--trials N] [--seed S]

Problem files are UTF-8 JSON; see the README for the full schema.  Human
reports go to stdout (numbers with 9 significant digits), machine reports
to the --json sink, iteration traces to stderr.  Exit codes: 0 success,
1 parse or format error, 2 cone violation, 3 infeasible, 4 iteration cap,
5 verification violation.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import LOAD_ASYMMETRY_REL, cone_tol
from .convexity import (
    SampleConfig,
    Verdict,
    convexity_sweep,
    hessian_psd_check,
    random_spd,
    zstar_injectivity_probe,
)
from .errors import (
    ConeViolationError,
    LogDetLmiError,
    ProblemFormatError,
)
from .lmi import (
    AffineExpr,
    Const,
    LMul,
    LmiConstraint,
    Neg,
    RMul,
    Sum,
    Transpose,
    VAR_X,
    VAR_Z,
    Var,
    feasibility_margin,
    format_expr,
    lift_for,
)
from .linalg import Cone, SymmetricMatrix, classify_cone
from .objective import Kind, evaluate, sylvester_check, z_star
from .solver import (
    SolverOptions,
    Status,
    Structure,
    solve_constrained,
    solve_lifted,
)

__all__ = [
    "ProblemFile",
    "constraint_from_json",
    "constraint_to_json",
    "load_problem",
    "main",
]

FORMAT_VERSION = "1"

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CONE = 2
EXIT_INFEASIBLE = 3
EXIT_MAX_ITER = 4
EXIT_VIOLATION = 5


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _fmt_matrix(a) -> str:
    a = np.asarray(a)
    return "[" + ", ".join(
        "[" + ", ".join(_fmt(v) for v in row) + "]" for row in a
    ) + "]"


# ---------------------------------------------------------------------------
# matrix literals and expression (de)serialization


def load_matrix_literal(obj, what: str) -> SymmetricMatrix:
    """Row-major nested arrays; rejected when asymmetry exceeds the load
    threshold (construction itself would silently average it away)."""
    try:
        a = np.array(obj, dtype=np.float64)
    except (TypeError, ValueError):
        raise ProblemFormatError(f"{what} is not a numeric matrix literal") from None
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ProblemFormatError(f"{what} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ProblemFormatError(f"{what} has non-finite entries")
    asym = float(np.max(np.abs(a - a.T)))
    limit = LOAD_ASYMMETRY_REL * (1.0 + float(np.linalg.norm(a)))
    if asym > limit:
        raise ProblemFormatError(
            f"{what} is asymmetric beyond tolerance: max |A - A'| = {asym:.3e} "
            f"> {limit:.3e}"
        )
    return SymmetricMatrix(a)


def _rect_const(obj, what: str) -> np.ndarray:
    try:
        a = np.array(obj, dtype=np.float64)
    except (TypeError, ValueError):
        raise ProblemFormatError(f"{what} is not a numeric matrix literal") from None
    if a.ndim != 2:
        raise ProblemFormatError(f"{what} must be a 2-d matrix literal")
    return a


def expr_to_json(expr: AffineExpr):
    if isinstance(expr, Const):
        return {"const": expr.value.tolist()}
    if isinstance(expr, Var):
        return {"var": expr.name, "dims": list(expr.dims)}
    if isinstance(expr, Sum):
        return {"sum": [expr_to_json(t) for t in expr.terms]}
    if isinstance(expr, Neg):
        return {"neg": expr_to_json(expr.expr)}
    if isinstance(expr, Transpose):
        return {"t": expr_to_json(expr.expr)}
    if isinstance(expr, LMul):
        return {"lmul": [expr.const.tolist(), expr_to_json(expr.expr)]}
    if isinstance(expr, RMul):
        return {"rmul": [expr_to_json(expr.expr), expr.const.tolist()]}
    raise TypeError(f"not an AffineExpr node: {expr!r}")


def _parse_var_term(d: dict, default_dims) -> AffineExpr:
    name = d["var"]
    if not isinstance(name, str):
        raise ProblemFormatError("variable name must be a string")
    dims = d.get("dims", default_dims)
    if dims is None:
        raise ProblemFormatError(f"variable {name!r} needs explicit dims")
    if not isinstance(dims, int):
        dims = tuple(int(v) for v in dims)
        if len(dims) != 2:
            raise ProblemFormatError(f"dims of {name!r} must be two integers")
    expr: AffineExpr = Var(name, dims)
    if d.get("transpose"):
        expr = Transpose(expr)
    if "left" in d:
        expr = LMul(_rect_const(d["left"], "left multiplier"), expr)
    if "right" in d:
        expr = RMul(expr, _rect_const(d["right"], "right multiplier"))
    sign = d.get("sign", 1)
    if sign not in (1, -1):
        raise ProblemFormatError(f"sign must be 1 or -1, got {sign!r}")
    if sign == -1:
        expr = Neg(expr)
    return expr


def expr_from_json(obj, default_dims=None) -> AffineExpr:
    """Parse an expression node.

    Accepts the exact tree form ({"sum": ...}, {"neg": ...}, {"t": ...},
    {"lmul": [M, e]}, {"rmul": [e, M]}, {"const": M}, {"var": ...}) plus a
    sugar form for variable terms: {"var": name, "left": M, "right": M,
    "sign": +-1, "transpose": bool}.  A list is the sugar for a sum of
    terms.
    """
    if isinstance(obj, list):
        terms = [expr_from_json(t, default_dims) for t in obj]
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))
    if not isinstance(obj, dict):
        raise ProblemFormatError(f"expected an expression object, got {type(obj).__name__}")
    if "const" in obj:
        return Const(_rect_const(obj["const"], "constant block"))
    if "var" in obj:
        return _parse_var_term(obj, default_dims)
    if "sum" in obj:
        parts = obj["sum"]
        if not isinstance(parts, list) or not parts:
            raise ProblemFormatError("sum needs a non-empty list")
        return Sum(tuple(expr_from_json(t, default_dims) for t in parts))
    if "neg" in obj:
        return Neg(expr_from_json(obj["neg"], default_dims))
    if "t" in obj:
        return Transpose(expr_from_json(obj["t"], default_dims))
    if "lmul" in obj:
        c, e = obj["lmul"]
        return LMul(_rect_const(c, "left multiplier"), expr_from_json(e, default_dims))
    if "rmul" in obj:
        e, c = obj["rmul"]
        return RMul(expr_from_json(e, default_dims), _rect_const(c, "right multiplier"))
    raise ProblemFormatError(f"unrecognized expression object: {sorted(obj)}")


def constraint_to_json(constraint: LmiConstraint) -> dict:
    r = len(constraint.blocks)
    grid = [[None] * r for _ in range(r)]
    for i, j, e in constraint.upper_blocks():
        grid[i][j] = expr_to_json(e)
    return {"name": constraint.name, "blocks": grid}


def constraint_from_json(obj, default_dims=None, name: str = "") -> LmiConstraint:
    if not isinstance(obj, dict) or "blocks" not in obj:
        raise ProblemFormatError("constraint must be an object with a 'blocks' grid")
    grid = obj["blocks"]
    if not isinstance(grid, list) or not grid:
        raise ProblemFormatError("'blocks' must be a non-empty grid")
    rows = []
    for i, row in enumerate(grid):
        if not isinstance(row, list) or len(row) != len(grid):
            raise ProblemFormatError("'blocks' must be a square grid")
        parsed = []
        for j, cell in enumerate(row):
            if cell is None:
                parsed.append(None)
            elif j < i:
                raise ProblemFormatError(
                    f"block ({i},{j}) is below the diagonal; it is derived "
                    "automatically and must be null"
                )
            else:
                parsed.append(expr_from_json(cell, default_dims))
        rows.append(parsed)
    try:
        return LmiConstraint(rows, name=obj.get("name", name))
    except LogDetLmiError as exc:
        raise ProblemFormatError(f"bad constraint blocks: {exc}") from None


# ---------------------------------------------------------------------------
# problem files


class ProblemFile:
    def __init__(self, kind, K, X=None, H=None, structure=Structure.FULL, options=None):
        self.kind = kind
        self.K = K
        self.X = X
        self.H = H
        self.structure = structure
        self.options = options or SolverOptions()


_OPTION_FIELDS = {
    "barrier_t0": float,
    "barrier_mu": float,
    "newton_tol": float,
    "duality_gap_tol": float,
    "max_outer": int,
    "max_newton": int,
    "feasibility_shift": float,
}


def load_problem(path: str) -> ProblemFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ProblemFormatError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ProblemFormatError("problem file must be a JSON object")

    version = raw.get("version")
    if version != FORMAT_VERSION:
        raise ProblemFormatError(
            f"unsupported format version {version!r}; expected {FORMAT_VERSION!r}"
        )
    kind_raw = raw.get("kind")
    if kind_raw not in ("F", "G"):
        raise ProblemFormatError(f"kind must be 'F' or 'G', got {kind_raw!r}")
    kind = Kind(kind_raw)

    if "K" not in raw:
        raise ProblemFormatError("problem file misses 'K'")
    K = load_matrix_literal(raw["K"], "K")
    tol = cone_tol()
    k_membership = classify_cone(K, tol)
    if k_membership.classification is Cone.INDEFINITE:
        raise ConeViolationError(
            f"K is not PSD at load tolerance {tol:g}: "
            f"min eigenvalue {k_membership.min_eigenvalue:.9g}",
            min_eigenvalue=k_membership.min_eigenvalue,
        )

    X = None
    if raw.get("X") is not None:
        X = load_matrix_literal(raw["X"], "X")
        if X.n != K.n:
            raise ProblemFormatError(f"X is {X.n}x{X.n} but K is {K.n}x{K.n}")
        x_membership = classify_cone(X, tol)
        if x_membership.classification is not Cone.PD:
            raise ConeViolationError(
                f"X is not PD at load tolerance {tol:g}: "
                f"min eigenvalue {x_membership.min_eigenvalue:.9g}",
                min_eigenvalue=x_membership.min_eigenvalue,
            )

    H = None
    if raw.get("H") is not None:
        H = constraint_from_json(raw["H"], default_dims=(K.n, K.n), name="H")
        extra = set(H.variables()) - {VAR_X}
        if extra:
            raise ProblemFormatError(
                f"H may reference only variable {VAR_X!r}, found {sorted(extra)}"
            )

    structure = Structure.FULL
    if raw.get("structure") is not None:
        try:
            structure = Structure(str(raw["structure"]).upper())
        except ValueError:
            raise ProblemFormatError(
                f"structure must be FULL or DIAGONAL, got {raw['structure']!r}"
            ) from None

    options = SolverOptions()
    if raw.get("solver") is not None:
        overrides = raw["solver"]
        if not isinstance(overrides, dict):
            raise ProblemFormatError("'solver' must be an object of option overrides")
        kwargs = {}
        for key, value in overrides.items():
            if key not in _OPTION_FIELDS:
                raise ProblemFormatError(f"unknown solver option {key!r}")
            try:
                kwargs[key] = _OPTION_FIELDS[key](value)
            except (TypeError, ValueError):
                raise ProblemFormatError(f"bad value for solver option {key!r}") from None
        try:
            options = SolverOptions(**kwargs)
        except ValueError as exc:
            raise ProblemFormatError(str(exc)) from None

    return ProblemFile(kind, K, X, H, structure, options)


# ---------------------------------------------------------------------------
# reports


def _emit(lines: list[str], payload: dict, json_path: str | None):
    for line in lines:
        print(line)
    if json_path:
        payload = dict(payload)
        payload["format_version"] = FORMAT_VERSION
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _common_payload(command: str, seed=None) -> dict:
    return {
        "command": command,
        "seed": seed,
        "tolerances": {"cone_tol": cone_tol()},
    }


def cmd_eval(pf: ProblemFile, json_path: str | None) -> int:
    if pf.X is None:
        raise ProblemFormatError("eval needs 'X' in the problem file")
    value = evaluate(pf.kind, pf.K, pf.X)
    zs = z_star(pf.kind, pf.K, pf.X)
    lift = lift_for(pf.kind, pf.K)
    margin = feasibility_margin(lift.constraint, {VAR_X: pf.X, VAR_Z: zs})
    lhs, rhs = sylvester_check(pf.K, pf.X)
    lines = [
        f"kind: {pf.kind.value}",
        f"n: {pf.K.n}",
        f"value: {_fmt(value)}",
        f"z_star: {_fmt_matrix(zs.a)}",
        f"lift margin at (X, z_star): {_fmt(margin)}",
        f"sylvester lhs: {_fmt(lhs)}  rhs: {_fmt(rhs)}",
        f"cone tolerance: {cone_tol():g}",
    ]
    payload = _common_payload("eval")
    payload.update(
        kind=pf.kind.value,
        value=value,
        z_star=zs.a.tolist(),
        lift_margin=margin,
        sylvester={"lhs": lhs, "rhs": rhs},
    )
    _emit(lines, payload, json_path)
    return EXIT_OK


def cmd_lift(pf: ProblemFile, json_path: str | None) -> int:
    lift = lift_for(pf.kind, pf.K)
    grid = "[" + ", ".join(
        "[" + ", ".join(format_expr(e) for e in row) + "]"
        for row in lift.constraint.blocks
    ) + "]"
    lines = [
        f"kind: {pf.kind.value}",
        f"objective: minimize -log det {lift.objective_var}",
        f"constraint {lift.constraint.name}: {grid} >= 0",
    ]
    payload = _common_payload("lift")
    payload.update(
        kind=pf.kind.value,
        objective_var=lift.objective_var,
        constraint=constraint_to_json(lift.constraint),
    )
    _emit(lines, payload, json_path)
    return EXIT_OK


def _status_exit(status: Status) -> int:
    if status is Status.OPTIMAL:
        return EXIT_OK
    if status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_MAX_ITER


def cmd_solve(pf: ProblemFile, json_path: str | None, trace: bool) -> int:
    sink = (lambda line: print(line, file=sys.stderr)) if trace else None
    if pf.H is not None:
        sol = solve_constrained(
            pf.kind, pf.K, pf.H, pf.structure, pf.options, trace=sink
        )
    elif pf.X is not None:
        sol = solve_lifted(pf.kind, pf.K, pf.X, pf.options, trace=sink)
    else:
        raise ProblemFormatError("solve needs either 'H' or a frozen 'X'")
    lines = [
        f"kind: {pf.kind.value}",
        f"status: {sol.status.value}",
        f"objective: {_fmt(sol.objective)}",
    ]
    for name, value in sol.assignment.items():
        lines.append(f"{name}*: {_fmt_matrix(value.a)}")
    for name, margin in sol.margins.items():
        lines.append(f"margin[{name}]: {_fmt(margin)}")
    lines.append(
        f"iterations: outer={sol.outer_iterations} newton={sol.newton_steps}"
    )
    for note in sol.diagnostics:
        lines.append(f"note: {note}")
    payload = _common_payload("solve")
    payload.update(
        kind=pf.kind.value,
        status=sol.status.value,
        objective=None if np.isnan(sol.objective) else sol.objective,
        assignment={k: v.a.tolist() for k, v in sol.assignment.items()},
        margins=sol.margins,
        outer_iterations=sol.outer_iterations,
        newton_steps=sol.newton_steps,
        diagnostics=sol.diagnostics,
    )
    _emit(lines, payload, json_path)
    return _status_exit(sol.status)


def cmd_verify(pf: ProblemFile, json_path: str | None, trials: int, seed: int) -> int:
    cfg = SampleConfig(n=pf.K.n, trials=trials, seed=seed)
    report = convexity_sweep(pf.kind, pf.K, cfg)
    probe = zstar_injectivity_probe(pf.K, trials=min(trials, 100), seed=seed)
    x0 = random_spd(pf.K.n, [seed, 777], 10.0)
    hess_min = hessian_psd_check(pf.kind, pf.K, x0, directions=20, h=1e-4, seed=seed)
    lines = [
        f"kind: {pf.kind.value}",
        f"verdict: {report.verdict.value}",
        f"trials: {report.trials}  seed: {report.seed}",
        f"worst violation (scale-normalized): {_fmt(report.worst_violation)}",
        f"tolerance: {report.tolerance:g}",
        f"strictness witnesses: {len(report.strictness_witnesses)}",
    ]
    for w in report.strictness_witnesses[:3]:
        lines.append(
            f"  witness slack {_fmt(w.slack)} at X={_fmt_matrix(w.x.a)} "
            f"Y={_fmt_matrix(w.y.a)}"
        )
    lines.append(
        f"z_star injectivity: {'injective' if probe.injective else 'collision found'} "
        f"(K {'PD' if probe.k_is_pd else 'not PD'}, "
        f"min separation {_fmt(probe.min_separation)})"
    )
    lines.append(f"hessian quadratic form minimum: {_fmt(hess_min)}")
    payload = _common_payload("verify", seed=seed)
    payload["tolerances"]["convexity_tol"] = report.tolerance
    payload.update(
        kind=pf.kind.value,
        verdict=report.verdict.value,
        trials=report.trials,
        worst_violation=report.worst_violation,
        strictness_floor=report.strictness_floor,
        witness_count=len(report.strictness_witnesses),
        injective=probe.injective,
        k_is_pd=probe.k_is_pd,
        min_separation=probe.min_separation,
        hessian_min=hess_min,
    )
    _emit(lines, payload, json_path)
    return EXIT_VIOLATION if report.verdict is Verdict.VIOLATION else EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="logdet-lmi",
        description="Evaluate, lift, solve and verify log-det LMI problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("eval", "lift", "solve", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="problem file (JSON)")
        p.add_argument("--json", dest="json_path", help="machine report sink")
        p.add_argument("--trace", action="store_true", help="stream iteration log")
        p.add_argument("--trials", type=int, default=200)
        p.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        pf = load_problem(args.input)
        if args.command == "eval":
            return cmd_eval(pf, args.json_path)
        if args.command == "lift":
            return cmd_lift(pf, args.json_path)
        if args.command == "solve":
            return cmd_solve(pf, args.json_path, args.trace)
        return cmd_verify(pf, args.json_path, args.trials, args.seed)
    except ConeViolationError as exc:
        print(f"cone violation: {exc}", file=sys.stderr)
        return EXIT_CONE
    except (ProblemFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except LogDetLmiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
