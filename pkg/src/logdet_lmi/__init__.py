"""Log-determinant objectives, their LMI liftings, a small dense MaxDet
interior-point solver, and numerical convexity certification."""

from .convexity import (
    ConvexityReport,
    InjectivityReport,
    SampleConfig,
    Verdict,
    Witness,
    convexity_sweep,
    hessian_psd_check,
    midpoint_slack,
    random_spd,
    zstar_injectivity_probe,
)
from .errors import (
    BindingError,
    ConeViolationError,
    EigenSolveError,
    LogDetLmiError,
    ProblemFormatError,
    ShapeError,
    SolveError,
)
from .lmi import (
    AffineExpr,
    Const,
    LMul,
    Lift,
    LmiConstraint,
    Neg,
    RMul,
    Sum,
    Transpose,
    Var,
    assemble,
    combine_assignments,
    eval_expr,
    feasibility_margin,
    lift_f,
    lift_for,
    lift_g,
    substitute,
    substitute_constraint,
)
from .linalg import (
    Cone,
    ConeMembership,
    SymmetricMatrix,
    as_symmetric,
    classify_cone,
    inv_pd,
    logdet_pd,
    schur_complement,
    solve_pd,
    sqrt_psd,
    sym_eig,
)
from .objective import (
    Kind,
    LogDetObjective,
    eval_f,
    eval_g,
    evaluate,
    fd_directional,
    grad_f,
    grad_g,
    gradient,
    sylvester_check,
    z_star,
    z_star_f,
    z_star_g,
)
from .solver import (
    MaxDetProblem,
    PhaseOneResult,
    Solution,
    SolverOptions,
    Status,
    Structure,
    VariableSpec,
    phase1,
    solve,
    solve_constrained,
    solve_lifted,
    solve_lifted_value,
)

__version__ = "0.1.0"
