"""Symbolic affine matrix expressions, block LMI constraints and the two
log-det liftings.

An :class:`AffineExpr` is a tree of constants, variable references, constant
left/right multiplications, sums, negations and transposes; no
variable-times-variable product is constructible, so every expression is
affine in its variables by construction.  An :class:`LmiConstraint` is a
square grid of such blocks whose assembled matrix must be PSD; only the
upper triangle is supplied and the lower one is derived as transposes, so
assembly is symmetric by construction.

The liftings map a PSD matrix K to the block LMI whose feasible slack
matrices Z satisfy -log det Z >= f(X) (resp. g(X)), with equality at the
attained slack:

    lift_f: [[I - Z,      K^{1/2}           ],
             [K^{1/2},    X + K             ]] >= 0

    lift_g: [[X - Z,      X K^{1/2}         ],
             [K^{1/2} X,  I + K^{1/2} X K^{1/2}]] >= 0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import BindingError, ShapeError
from .linalg import SymmetricMatrix, as_symmetric, sym_eig, sqrt_psd
from .objective import Kind

__all__ = [
    "AffineExpr",
    "Assignment",
    "Const",
    "LMul",
    "Lift",
    "LmiConstraint",
    "Neg",
    "RMul",
    "Sum",
    "Transpose",
    "Var",
    "assemble",
    "combine_assignments",
    "constraint_equal",
    "eval_expr",
    "expr_equal",
    "feasibility_margin",
    "format_expr",
    "lift_f",
    "lift_for",
    "lift_g",
    "substitute",
    "substitute_constraint",
    "variables_of",
]

Assignment = Mapping[str, "SymmetricMatrix | np.ndarray"]


class AffineExpr:
    """Affine matrix expression over named matrix variables."""

    __slots__ = ()

    @property
    def shape(self) -> tuple[int, int]:
        raise NotImplementedError


def _const_array(value) -> np.ndarray:
    a = np.array(value, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"constants must be 2-d, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False, repr=False)
class Const(AffineExpr):
    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self,
            "value",
            self.value.a if isinstance(self.value, SymmetricMatrix)
            else _const_array(self.value),
        )

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Const({self.value.tolist()!r})"


@dataclass(frozen=True, repr=False)
class Var(AffineExpr):
    name: str
    dims: tuple[int, int]

    def __post_init__(self):
        dims = self.dims
        if isinstance(dims, int):
            dims = (dims, dims)
        dims = (int(dims[0]), int(dims[1]))
        if dims[0] < 1 or dims[1] < 1:
            raise ShapeError(f"variable {self.name!r} has invalid dims {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def shape(self):
        return self.dims

    def __repr__(self):
        return f"Var({self.name!r}, {self.dims!r})"


@dataclass(frozen=True, eq=False, repr=False)
class LMul(AffineExpr):
    const: np.ndarray
    expr: AffineExpr

    def __post_init__(self):
        object.__setattr__(self, "const", _const_array(self.const))
        if self.const.shape[1] != self.expr.shape[0]:
            raise ShapeError(
                f"cannot multiply {self.const.shape} by {self.expr.shape}"
            )

    @property
    def shape(self):
        return (self.const.shape[0], self.expr.shape[1])

    def __repr__(self):
        return f"LMul({self.const.tolist()!r}, {self.expr!r})"


@dataclass(frozen=True, eq=False, repr=False)
class RMul(AffineExpr):
    expr: AffineExpr
    const: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "const", _const_array(self.const))
        if self.expr.shape[1] != self.const.shape[0]:
            raise ShapeError(
                f"cannot multiply {self.expr.shape} by {self.const.shape}"
            )

    @property
    def shape(self):
        return (self.expr.shape[0], self.const.shape[1])

    def __repr__(self):
        return f"RMul({self.expr!r}, {self.const.tolist()!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Sum(AffineExpr):
    terms: tuple[AffineExpr, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ShapeError("Sum needs at least one term")
        shape = terms[0].shape
        for t in terms[1:]:
            if t.shape != shape:
                raise ShapeError(f"Sum mixes shapes {shape} and {t.shape}")
        object.__setattr__(self, "terms", terms)

    @property
    def shape(self):
        return self.terms[0].shape

    def __repr__(self):
        return f"Sum({self.terms!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Neg(AffineExpr):
    expr: AffineExpr

    @property
    def shape(self):
        return self.expr.shape

    def __repr__(self):
        return f"Neg({self.expr!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Transpose(AffineExpr):
    expr: AffineExpr

    @property
    def shape(self):
        return (self.expr.shape[1], self.expr.shape[0])

    def __repr__(self):
        return f"Transpose({self.expr!r})"


def eval_expr(expr: AffineExpr, assignment: Assignment) -> np.ndarray:
    """Evaluate an expression at a variable assignment (structural recursion)."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        try:
            value = assignment[expr.name]
        except KeyError:
            raise BindingError(f"variable {expr.name!r} is not bound") from None
        arr = value.a if isinstance(value, SymmetricMatrix) else np.asarray(
            value, dtype=np.float64
        )
        if arr.shape != expr.dims:
            raise ShapeError(
                f"variable {expr.name!r} bound with shape {arr.shape}, "
                f"declared {expr.dims}"
            )
        return arr
    if isinstance(expr, Sum):
        total = eval_expr(expr.terms[0], assignment).copy()
        for t in expr.terms[1:]:
            total += eval_expr(t, assignment)
        return total
    if isinstance(expr, Neg):
        return -eval_expr(expr.expr, assignment)
    if isinstance(expr, Transpose):
        return eval_expr(expr.expr, assignment).T
    if isinstance(expr, LMul):
        return expr.const @ eval_expr(expr.expr, assignment)
    if isinstance(expr, RMul):
        return eval_expr(expr.expr, assignment) @ expr.const
    raise TypeError(f"not an AffineExpr node: {expr!r}")


def variables_of(expr: AffineExpr, into: dict | None = None) -> dict[str, tuple[int, int]]:
    """All variables referenced by an expression, with consistent dims."""
    out = {} if into is None else into
    if isinstance(expr, Var):
        seen = out.get(expr.name)
        if seen is not None and seen != expr.dims:
            raise ShapeError(
                f"variable {expr.name!r} used with dims {seen} and {expr.dims}"
            )
        out[expr.name] = expr.dims
    elif isinstance(expr, Sum):
        for t in expr.terms:
            variables_of(t, out)
    elif isinstance(expr, (Neg, Transpose, LMul, RMul)):
        variables_of(expr.expr, out)
    return out


def substitute(expr: AffineExpr, bindings: Mapping[str, np.ndarray]) -> AffineExpr:
    """Replace bound variables with constants, leaving the rest symbolic."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Var):
        if expr.name not in bindings:
            return expr
        value = bindings[expr.name]
        arr = value.a if isinstance(value, SymmetricMatrix) else np.asarray(
            value, dtype=np.float64
        )
        if arr.shape != expr.dims:
            raise ShapeError(
                f"substitution for {expr.name!r} has shape {arr.shape}, "
                f"declared {expr.dims}"
            )
        return Const(arr)
    if isinstance(expr, Sum):
        return Sum(tuple(substitute(t, bindings) for t in expr.terms))
    if isinstance(expr, Neg):
        return Neg(substitute(expr.expr, bindings))
    if isinstance(expr, Transpose):
        return Transpose(substitute(expr.expr, bindings))
    if isinstance(expr, LMul):
        return LMul(expr.const, substitute(expr.expr, bindings))
    if isinstance(expr, RMul):
        return RMul(substitute(expr.expr, bindings), expr.const)
    raise TypeError(f"not an AffineExpr node: {expr!r}")


def expr_equal(a: AffineExpr, b: AffineExpr, atol: float = 0.0) -> bool:
    """Structural equality of two expression trees (constants within atol)."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Const):
        return a.shape == b.shape and bool(np.all(np.abs(a.value - b.value) <= atol))
    if isinstance(a, Var):
        return a.name == b.name and a.dims == b.dims
    if isinstance(a, Sum):
        return len(a.terms) == len(b.terms) and all(
            expr_equal(x, y, atol) for x, y in zip(a.terms, b.terms)
        )
    if isinstance(a, (Neg, Transpose)):
        return expr_equal(a.expr, b.expr, atol)
    if isinstance(a, LMul):
        return bool(np.all(np.abs(a.const - b.const) <= atol)) and expr_equal(
            a.expr, b.expr, atol
        )
    if isinstance(a, RMul):
        return bool(np.all(np.abs(a.const - b.const) <= atol)) and expr_equal(
            a.expr, b.expr, atol
        )
    return False


class LmiConstraint:
    """Square grid of affine blocks whose assembled matrix must be PSD.

    Only the diagonal and upper-triangle blocks are supplied; lower blocks
    must be passed as None and are derived as transposes.  Upper
    off-diagonal Nones mean zero blocks.
    """

    __slots__ = ("blocks", "name", "block_dims")

    def __init__(self, blocks, name: str = ""):
        rows = [list(r) for r in blocks]
        r = len(rows)
        if r < 1 or any(len(row) != r for row in rows):
            raise ShapeError("blocks must form a square grid")
        dims = []
        for i in range(r):
            d = rows[i][i]
            if d is None:
                raise ShapeError(f"diagonal block ({i},{i}) is required")
            if d.shape[0] != d.shape[1]:
                raise ShapeError(
                    f"diagonal block ({i},{i}) must be square, got {d.shape}"
                )
            dims.append(d.shape[0])
        full = [[None] * r for _ in range(r)]
        for i in range(r):
            full[i][i] = rows[i][i]
            for j in range(i + 1, r):
                if rows[j][i] is not None:
                    raise ShapeError(
                        f"block ({j},{i}) is below the diagonal; pass None, "
                        "it is derived as a transpose"
                    )
                e = rows[i][j]
                if e is None:
                    e = Const(np.zeros((dims[i], dims[j])))
                if e.shape != (dims[i], dims[j]):
                    raise ShapeError(
                        f"block ({i},{j}) has shape {e.shape}, "
                        f"expected {(dims[i], dims[j])}"
                    )
                full[i][j] = e
                full[j][i] = Transpose(e)
        self.blocks = tuple(tuple(row) for row in full)
        self.name = name
        self.block_dims = tuple(dims)

    @property
    def n(self) -> int:
        return sum(self.block_dims)

    def upper_blocks(self):
        """Iterate (i, j, expr) over the stored diagonal and upper blocks."""
        r = len(self.blocks)
        for i in range(r):
            for j in range(i, r):
                yield i, j, self.blocks[i][j]

    def variables(self) -> dict[str, tuple[int, int]]:
        out: dict[str, tuple[int, int]] = {}
        for _, _, e in self.upper_blocks():
            variables_of(e, out)
        return out

    def __repr__(self):
        return f"LmiConstraint(name={self.name!r}, dims={self.block_dims!r})"


def assemble(constraint: LmiConstraint, assignment: Assignment) -> SymmetricMatrix:
    """Tile the evaluated blocks into one symmetric matrix.

    Assembly is affine in the assignment, so convex combinations of
    assignments commute with assembly up to round-off.
    """
    vals = [
        [eval_expr(e, assignment) for e in row] for row in constraint.blocks
    ]
    return SymmetricMatrix(np.block(vals))


def feasibility_margin(constraint: LmiConstraint, assignment: Assignment) -> float:
    """Min eigenvalue of the assembled constraint; >= 0 means feasible."""
    w, _ = sym_eig(assemble(constraint, assignment))
    return float(w[0])


def constraint_equal(a: LmiConstraint, b: LmiConstraint, atol: float = 0.0) -> bool:
    if a.block_dims != b.block_dims:
        return False
    return all(
        expr_equal(ea, eb, atol)
        for (_, _, ea), (_, _, eb) in zip(a.upper_blocks(), b.upper_blocks())
    )


def combine_assignments(a: Assignment, b: Assignment, lam: float) -> dict:
    """Convex combination lam*a + (1-lam)*b, key by key."""
    if set(a) != set(b):
        raise BindingError("assignments bind different variables")
    out = {}
    for name in a:
        xa = a[name].a if isinstance(a[name], SymmetricMatrix) else np.asarray(a[name])
        xb = b[name].a if isinstance(b[name], SymmetricMatrix) else np.asarray(b[name])
        out[name] = SymmetricMatrix(lam * xa + (1.0 - lam) * xb)
    return out


@dataclass(frozen=True)
class Lift:
    objective_var: str
    constraint: LmiConstraint


VAR_X = "X"
VAR_Z = "Z"


def lift_f(K, tol: float | None = None) -> Lift:
    """Block LMI representation of f: minimizing -log det Z over the
    feasible Z recovers f(X) for every PD X.
    """
    K = as_symmetric(K)
    s = sqrt_psd(K, tol)
    n = K.n
    eye = np.eye(n)
    constraint = LmiConstraint(
        [
            [Sum((Const(eye), Neg(Var(VAR_Z, n)))), Const(s.a)],
            [None, Sum((Var(VAR_X, n), Const(K.a)))],
        ],
        name="lift_f",
    )
    return Lift(VAR_Z, constraint)


def lift_g(K, tol: float | None = None) -> Lift:
    """Block LMI representation of g, with off-diagonal blocks X K^{1/2}
    and K^{1/2} X exactly as transposes of each other.
    """
    K = as_symmetric(K)
    s = sqrt_psd(K, tol)
    n = K.n
    eye = np.eye(n)
    x = Var(VAR_X, n)
    constraint = LmiConstraint(
        [
            [Sum((x, Neg(Var(VAR_Z, n)))), RMul(x, s.a)],
            [None, Sum((Const(eye), LMul(s.a, RMul(x, s.a))))],
        ],
        name="lift_g",
    )
    return Lift(VAR_Z, constraint)


def lift_for(kind: Kind, K, tol: float | None = None) -> Lift:
    return lift_f(K, tol) if kind is Kind.F else lift_g(K, tol)


def substitute_constraint(
    constraint: LmiConstraint, bindings: Mapping[str, np.ndarray]
) -> LmiConstraint:
    """Freeze some variables of a constraint to constants."""
    r = len(constraint.blocks)
    rows = [[None] * r for _ in range(r)]
    for i, j, e in constraint.upper_blocks():
        rows[i][j] = substitute(e, bindings)
    return LmiConstraint(rows, name=constraint.name)


def _format_const(a: np.ndarray) -> str:
    if a.shape == (1, 1):
        return f"{a[0, 0]:.9g}"
    if a.shape[0] == a.shape[1] and np.array_equal(a, np.eye(a.shape[0])):
        return "I"
    if not np.any(a):
        return "0"
    rows = ", ".join(
        "[" + ", ".join(f"{v:.9g}" for v in row) + "]" for row in a
    )
    return "[" + rows + "]"


def format_expr(expr: AffineExpr) -> str:
    """Compact single-line rendering, for inspection output."""
    if isinstance(expr, Const):
        return _format_const(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Sum):
        parts = []
        for t in expr.terms:
            if isinstance(t, Neg):
                parts.append(f"- {format_expr(t.expr)}")
            elif parts:
                parts.append(f"+ {format_expr(t)}")
            else:
                parts.append(format_expr(t))
        return " ".join(parts)
    if isinstance(expr, Neg):
        return f"-{format_expr(expr.expr)}"
    if isinstance(expr, Transpose):
        return f"{format_expr(expr.expr)}'"
    if isinstance(expr, LMul):
        return f"{_format_const(expr.const)}*{format_expr(expr.expr)}"
    if isinstance(expr, RMul):
        return f"{format_expr(expr.expr)}*{_format_const(expr.const)}"
    raise TypeError(f"not an AffineExpr node: {expr!r}")
