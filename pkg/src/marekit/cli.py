"""Command-line front end.

Subcommands over problem JSON files:

    classify <problem.json>
    solve <problem.json> [--method adda|sda|fixed-point] [--alpha X --beta Y]
                         [--tol T] [--max-iter N] [--trace out.csv]
    verify <problem.json> --phi <phi.json> --psi <psi.json> [--tol T]
    oracle <problem.json> [--tol T] [--max-iter N]
    generate --regime nonsingular|singular-noncritical|critical
             --n N --m M --seed S [--density F] -o <out.json>
    rate-study <problem.json> [--grid G]

Reports are JSON on stdout with a fixed field set; every float is printed
with 17 significant digits so identical runs produce identical bytes.
Exit codes: 0 all requested checks passed, 1 check failures, 2 input or
usage errors, 3 numerical breakdown.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import doubling, probgen
from .errors import (
    AmbiguousKernel,
    GenerationFailed,
    InsufficientTrace,
    InvalidParameters,
    IterationBreakdown,
    MaxIterations,
    NoConvergence,
    NonpositiveDiagonal,
    NotSingular,
    NotZMatrix,
    ShapeMismatch,
    SingularMatrix,
)
from .fixedpoint import fixed_point_solve
from .problem import (
    Regime,
    classify_problem,
    make_certificate,
    matrix_from_json,
    matrix_to_jsonable,
    problem_from_json,
    problem_to_json,
)

_USAGE_ERRORS = (
    NotZMatrix,
    ShapeMismatch,
    InvalidParameters,
    NonpositiveDiagonal,
    ValueError,
    OSError,
    json.JSONDecodeError,
)
_BREAKDOWN_ERRORS = (
    SingularMatrix,
    IterationBreakdown,
    NoConvergence,
    NotSingular,
    AmbiguousKernel,
    GenerationFailed,
)


@dataclass(frozen=True)
class CommandOutcome:
    exit_code: int
    report_json: str
    trace_csv_path: str | None = None


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# Deterministic report serialization (17 significant digits)
# ---------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(float(x), ".17g")


def dumps_report(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits, keys in insertion order."""
    pad = "  " * indent
    pad_in = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join(pad_in + dumps_report(v, indent + 1) for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            pad_in + json.dumps(str(k)) + ": " + dumps_report(v, indent + 1)
            for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _base_report() -> dict:
    return {
        "regime": None,
        "drift": None,
        "r": None,
        "alpha": None,
        "beta": None,
        "iterations": None,
        "residual_primal": None,
        "residual_dual": None,
        "rho_phi_psi": None,
        "theoretical_rate": None,
        "observed_rate": None,
        "checks": [],
    }


def _check_entry(c) -> dict:
    return {
        "name": c.name,
        "passed": c.passed,
        "value": c.value,
        "threshold": c.threshold,
        "detail": c.detail,
    }


def _fill_classification(report: dict, pc) -> None:
    report["regime"] = pc.regime.value
    report["drift"] = pc.drift
    report["r"] = pc.zero_structure.algebraic_multiplicity


def _fill_certificate(report: dict, cert) -> None:
    report["residual_primal"] = cert.residual_primal
    report["residual_dual"] = cert.residual_dual
    report["rho_phi_psi"] = cert.rho_phi_psi
    report["checks"] = [_check_entry(c) for c in cert.checks]


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _load_problem(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_json(fh.read())


def _cmd_classify(ns) -> CommandOutcome:
    p = _load_problem(ns.problem)
    pc = classify_problem(p)
    report = _base_report()
    _fill_classification(report, pc)
    return CommandOutcome(0, dumps_report(report))


def _cmd_solve(ns) -> CommandOutcome:
    p = _load_problem(ns.problem)
    report = _base_report()
    if ns.method == "fixed-point":
        primal = fixed_point_solve(p, tol=ns.tol or 1e-10, max_iter=ns.max_iter or 5000)
        dual = fixed_point_solve(p.dual(), tol=ns.tol or 1e-10, max_iter=ns.max_iter or 5000)
        pc = classify_problem(p)
        cert = make_certificate(p, primal.phi, dual.phi, problem_class=pc)
        _fill_classification(report, pc)
        _fill_certificate(report, cert)
        report["iterations"] = primal.iterations
        report["phi"] = matrix_to_jsonable(primal.phi)
        report["psi"] = matrix_to_jsonable(dual.phi)
        if not (primal.converged and dual.converged):
            return CommandOutcome(3, dumps_report(report))
        return CommandOutcome(0 if cert.all_passed else 1, dumps_report(report))

    requested = None
    if (ns.alpha is None) != (ns.beta is None):
        raise _UsageError("--alpha and --beta must be given together")
    if ns.alpha is not None:
        requested = (ns.alpha, ns.beta)
    params = doubling.select_parameters(
        p,
        requested,
        mode=ns.method,
        max_iter=ns.max_iter or 60,
        stop_tol=ns.tol or 1e-14,
    )
    trace_path = None
    try:
        result = doubling.solve(p, params)
    except MaxIterations as exc:
        if exc.report is not None:
            _emit_solve_report(report, exc.report)
            if ns.trace:
                trace_path = _write_trace(ns.trace, exc.report.trace)
        report["error"] = str(exc)
        return CommandOutcome(3, dumps_report(report), trace_path)
    _emit_solve_report(report, result)
    if ns.trace:
        trace_path = _write_trace(ns.trace, result.trace)
    ok = result.certificate.all_passed and result.converged
    return CommandOutcome(0 if ok else 1, dumps_report(report), trace_path)


def _emit_solve_report(report: dict, result) -> None:
    _fill_classification(report, result.problem_class)
    _fill_certificate(report, result.certificate)
    report["alpha"] = result.params.alpha
    report["beta"] = result.params.beta
    report["iterations"] = result.iterations
    report["theoretical_rate"] = result.theoretical_rate
    report["observed_rate"] = result.observed_rate
    report["phi"] = matrix_to_jsonable(result.phi)
    report["psi"] = matrix_to_jsonable(result.psi)
    if result.flags:
        report["flags"] = list(result.flags)


def _write_trace(path: str, trace) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(doubling.trace_to_csv(trace))
    return path


def _cmd_verify(ns) -> CommandOutcome:
    p = _load_problem(ns.problem)
    with open(ns.phi, "r", encoding="utf-8") as fh:
        phi = matrix_from_json(fh.read())
    with open(ns.psi, "r", encoding="utf-8") as fh:
        psi = matrix_from_json(fh.read())
    pc = classify_problem(p)
    cert = make_certificate(p, phi, psi, tol=ns.tol, problem_class=pc)
    report = _base_report()
    _fill_classification(report, pc)
    _fill_certificate(report, cert)
    return CommandOutcome(0 if cert.all_passed else 1, dumps_report(report))


def _cmd_oracle(ns) -> CommandOutcome:
    p = _load_problem(ns.problem)
    result = fixed_point_solve(p, tol=ns.tol, max_iter=ns.max_iter)
    pc = classify_problem(p)
    report = _base_report()
    _fill_classification(report, pc)
    report["iterations"] = result.iterations
    report["residual_primal"] = result.final_residual
    report["phi"] = matrix_to_jsonable(result.phi)
    report["converged"] = result.converged
    return CommandOutcome(0 if result.converged else 3, dumps_report(report))


_REGIME_NAMES = {
    "nonsingular": Regime.NONSINGULAR_K,
    "singular-noncritical": Regime.SINGULAR_NONCRITICAL,
    "critical": Regime.CRITICAL,
}


def _cmd_generate(ns) -> CommandOutcome:
    spec = probgen.FamilySpec(
        regime_target=_REGIME_NAMES[ns.regime],
        n=ns.n,
        m=ns.m,
        seed=ns.seed,
        density=ns.density,
    )
    problem = probgen.generate(spec)
    with open(ns.output, "w", encoding="utf-8") as fh:
        fh.write(problem_to_json(problem))
        fh.write("\n")
    pc = classify_problem(problem)
    report = _base_report()
    _fill_classification(report, pc)
    report["path"] = ns.output
    return CommandOutcome(0, dumps_report(report))


def _cmd_rate_study(ns) -> CommandOutcome:
    p = _load_problem(ns.problem)
    params = doubling.select_parameters(p)
    result = doubling.solve(p, params)
    report = _base_report()
    _emit_solve_report(report, result)
    base_rate = result.theoretical_rate
    grid = []
    ok = True
    levels = [1.0 + 0.5 * i for i in range(ns.grid)]
    for fa in levels:
        for fb in levels:
            alt = doubling.DoublingParams(params.alpha * fa, params.beta * fb)
            rate = doubling.theoretical_rate(p, result.certificate, alt)
            grid.append({"alpha": alt.alpha, "beta": alt.beta, "theoretical_rate": rate})
            if base_rate > rate + 1e-12:
                ok = False
    report["grid"] = grid
    report["checks"] = report["checks"] + [
        {
            "name": "optimal-parameters-minimize-rate",
            "passed": ok,
            "value": base_rate,
            "threshold": 1e-12,
            "detail": f"{len(grid)} grid points",
        }
    ]
    return CommandOutcome(0 if ok and result.certificate.all_passed else 1, dumps_report(report))


# ---------------------------------------------------------------------------
# Argument grammar and dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="marekit", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="report the problem regime")
    c.add_argument("problem")
    c.set_defaults(handler=_cmd_classify)

    s = sub.add_parser("solve", help="compute the minimal nonnegative solutions")
    s.add_argument("problem")
    s.add_argument("--method", choices=["adda", "sda", "fixed-point"], default="adda")
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", type=int, dest="max_iter")
    s.add_argument("--trace")
    s.set_defaults(handler=_cmd_solve)

    v = sub.add_parser("verify", help="certify a candidate solution pair")
    v.add_argument("problem")
    v.add_argument("--phi", required=True)
    v.add_argument("--psi", required=True)
    v.add_argument("--tol", type=float, default=1e-8)
    v.set_defaults(handler=_cmd_verify)

    o = sub.add_parser("oracle", help="independent monotone fixed-point solve")
    o.add_argument("problem")
    o.add_argument("--tol", type=float, default=1e-10)
    o.add_argument("--max-iter", type=int, dest="max_iter", default=5000)
    o.set_defaults(handler=_cmd_oracle)

    g = sub.add_parser("generate", help="emit a seeded problem in a target regime")
    g.add_argument("--regime", choices=sorted(_REGIME_NAMES), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--density", type=float, default=0.7)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(handler=_cmd_generate)

    r = sub.add_parser("rate-study", help="compare convergence factors on a parameter grid")
    r.add_argument("problem")
    r.add_argument("--grid", type=int, default=3)
    r.set_defaults(handler=_cmd_rate_study)

    return parser


def execute(argv) -> CommandOutcome:
    """Run one CLI invocation; never raises for expected failure modes."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        return CommandOutcome(2, dumps_report({"error": str(exc)}))
    try:
        return ns.handler(ns)
    except _UsageError as exc:
        return CommandOutcome(2, dumps_report({"error": str(exc)}))
    except _USAGE_ERRORS as exc:
        return CommandOutcome(2, dumps_report({"error": str(exc)}))
    except MaxIterations as exc:
        return CommandOutcome(3, dumps_report({"error": str(exc)}))
    except _BREAKDOWN_ERRORS as exc:
        return CommandOutcome(3, dumps_report({"error": str(exc), "step": type(exc).__name__}))
    except InsufficientTrace as exc:
        return CommandOutcome(3, dumps_report({"error": str(exc)}))


def main(argv=None) -> int:
    outcome = execute(sys.argv[1:] if argv is None else argv)
    print(outcome.report_json)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
