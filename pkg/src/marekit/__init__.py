"""marekit: doubling solvers and structure verification for M-matrix
algebraic Riccati equations.

The equation solved is ``X C X - X D - A X + B = 0`` (with its dual
``Y B Y - Y A - D Y + C = 0``), for coefficient data whose block matrix
``[[D, -C], [-B, A]]`` is an M-matrix.  The package classifies the problem
(nonsingular / singular-noncritical / critical / degenerate), computes the
minimal nonnegative solutions by a two-parameter doubling iteration with a
slow independent fixed-point cross-check, and certifies the structural
invariants the theory promises.
"""

from .errors import (
    AmbiguousKernel,
    GenerationFailed,
    InsufficientTrace,
    InvalidParameters,
    IterationBreakdown,
    MareError,
    MaxIterations,
    NoConvergence,
    NonpositiveDiagonal,
    NotSingular,
    NotZMatrix,
    ShapeMismatch,
    SingularMatrix,
)
from .linalg import (
    Factorization,
    eigenvalues,
    numerical_rank,
    solve_linear,
    spectral_radius,
    spectral_radius_nonneg,
    sylvester_solve,
)
from .mstruct import (
    MatrixKind,
    MClassification,
    NullPair,
    RegularityReport,
    ZeroEigenStructure,
    classify_zm,
    is_irreducible,
    null_pair,
    regularity_witness,
    zero_eigen_structure,
)
from .problem import (
    Certificate,
    CheckResult,
    MareProblem,
    ProblemClass,
    Regime,
    classify_problem,
    make_certificate,
    matrix_from_json,
    matrix_to_jsonable,
    problem_from_json,
    problem_to_json,
    residual_dual,
    residual_primal,
)
from .doubling import (
    DoublingParams,
    DoublingState,
    SolveReport,
    initialize,
    observed_rate,
    select_parameters,
    solve,
    step,
    theoretical_rate,
    trace_to_csv,
)
from .fixedpoint import OracleReport, fixed_point_solve
from .probgen import FamilySpec, generate

__version__ = "0.1.0"

__all__ = [
    "AmbiguousKernel",
    "Certificate",
    "CheckResult",
    "DoublingParams",
    "DoublingState",
    "Factorization",
    "FamilySpec",
    "GenerationFailed",
    "InsufficientTrace",
    "InvalidParameters",
    "IterationBreakdown",
    "MClassification",
    "MareError",
    "MareProblem",
    "MatrixKind",
    "MaxIterations",
    "NoConvergence",
    "NonpositiveDiagonal",
    "NotSingular",
    "NotZMatrix",
    "NullPair",
    "OracleReport",
    "ProblemClass",
    "Regime",
    "RegularityReport",
    "ShapeMismatch",
    "SingularMatrix",
    "SolveReport",
    "ZeroEigenStructure",
    "classify_problem",
    "classify_zm",
    "eigenvalues",
    "fixed_point_solve",
    "generate",
    "initialize",
    "is_irreducible",
    "make_certificate",
    "matrix_from_json",
    "matrix_to_jsonable",
    "null_pair",
    "numerical_rank",
    "observed_rate",
    "problem_from_json",
    "problem_to_json",
    "regularity_witness",
    "residual_dual",
    "residual_primal",
    "select_parameters",
    "solve",
    "solve_linear",
    "spectral_radius",
    "spectral_radius_nonneg",
    "step",
    "sylvester_solve",
    "theoretical_rate",
    "trace_to_csv",
    "zero_eigen_structure",
]
