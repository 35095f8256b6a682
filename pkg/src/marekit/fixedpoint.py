"""Independent fixed-point solver, used as the minimality cross-check.

Splitting the equation ``X C X - X D - A X + B = 0`` as

    A X_{k+1} + X_{k+1} D = X_k C X_k + B,        X_0 = 0,

gives a sequence that increases entrywise from zero and stays below every
nonnegative solution, so its limit is the minimal one.  Each step is one
linear Sylvester solve with fixed coefficients (prefactored once).  This
solver exists to be obviously correct, not fast: convergence is linear,
and in the critical regime sublinear, so hitting the iteration cap there
is expected and reported rather than raised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .doubling import sign_tol
from .linalg import SylvesterSolver
from .problem import MareProblem, residual_primal


@dataclass(frozen=True)
class OracleReport:
    phi: np.ndarray
    iterations: int
    converged: bool
    final_residual: float
    monotonicity_violations: int


def fixed_point_solve(p: MareProblem, tol: float = 1e-10, max_iter: int = 5000) -> OracleReport:
    """Iterate the monotone fixed-point map from X = 0.

    Stops when the normalized primal residual drops to ``tol``; returns a
    report with ``converged=False`` when the cap is reached first (the best
    iterate is still attached).  Entrywise monotonicity is checked at every
    step to the problem's sign tolerance and violations are counted.
    """
    solver = SylvesterSolver(p.A, p.D)
    tau = sign_tol(p)
    X = np.zeros((p.m, p.n))
    res = residual_primal(p, X)
    violations = 0
    for k in range(1, max_iter + 1):
        X_new = solver.solve(X @ p.C @ X + p.B)
        violations += int((X_new < X - tau).sum())
        X = X_new
        res = residual_primal(p, X)
        if res <= tol:
            return OracleReport(X, k, True, res, violations)
    return OracleReport(X, max_iter, False, res, violations)
