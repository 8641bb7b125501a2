"""Command-line front end.

    qdiscrim solve PROBLEM.json [--tol T] [--grid-step S] [--output text|structured] [--save FILE]
    qdiscrim verify SOLUTION.json PROBLEM.json [--tol T]
    qdiscrim oracle PROBLEM.json [--samples N] [--grid-step S] [--seed K] [--exhaustive]
    qdiscrim fixture [NAME]

Exit codes: 0 success, 1 invalid input, 2 solver did not converge (partial
output is still written), 3 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from importlib import resources

import numpy as np

from . import __version__
from .bayes import DualCertificate, bayes_risk_n, certificate_slack
from .errors import ConvergenceFailure, DiscriminationError
from .herm import Povm, max_abs
from .minimax import minimax_covariant, minimax_n, minimax_two_state
from .oracle import brute_force_minimax, diagonal_exhaustive
from .serialization import (
    SCHEMA_VERSION,
    SOLUTION_SCHEMA,
    decode_array,
    dumps,
    encode_array,
    parse_problem,
    real_list,
    validate,
)
from .unambiguous import PureStateSet, dual_basis, refine, unambiguous_minimax, uniqueness_test

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_VERIFY = 0, 1, 2, 3
POSITIVITY_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
FEASIBILITY_TOL = 1e-8
RISK_TOL = 1e-8
UNAMBIGUITY_TOL = 1e-9
KAPPA_TOL = 1e-10
COVARIANT_TOL = 1e-8


class InputError(Exception):
    pass


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None


def _load_problem(path, args):
    doc = _load_json(path)
    try:
        spec = parse_problem(doc)
    except (ValueError, DiscriminationError) as exc:
        raise InputError(f"{path}: {exc}") from None
    tol = dict(spec.tolerances)
    if getattr(args, "tol", None) is not None:
        tol["gap_tol"] = args.tol
    if getattr(args, "grid_step", None) is not None:
        tol["simplex_grid_step"] = args.grid_step
    return spec, tol


def _build(spec, tol):
    try:
        if spec.mode == "unambiguous":
            return PureStateSet(np.stack(spec.states))
        return replace(spec, tolerances=tol).problem()
    except (ValueError, DiscriminationError) as exc:
        raise InputError(str(exc)) from None


def _certificate_doc(cert):
    return {"y": encode_array(cert.y), "prior": real_list(cert.prior), "bound": cert.bound}


def _bayes_doc(sol):
    return {
        "povm": [encode_array(p) for p in sol.povm],
        "risk": sol.risk,
        "prior": real_list(sol.prior),
        "success_per_state": real_list(sol.success_per_state),
        "certificate": _certificate_doc(sol.certificate),
        "gap": sol.gap,
    }


def _minimax_doc(sol):
    return {
        "povm": [encode_array(p) for p in sol.povm],
        "risk": sol.risk,
        "worst_prior": real_list(sol.worst_prior),
        "per_state_risk": real_list(sol.per_state_risk),
        "certificate": _certificate_doc(sol.certificate),
        "gap": sol.width,
        "equalized": bool(sol.equalized),
        "unique": bool(sol.unique),
    }


def _unambiguous_doc(sol, refined):
    doc = {
        "povm": [encode_array(p) for p in sol.povm],
        "kappa": sol.kappa,
        "success_per_state": real_list(sol.success_per_state),
        "unique": bool(sol.unique),
        "witnesses": [int(i) for i in sol.witnesses],
    }
    if refined is not None:
        doc["refined"] = {
            "povm": [encode_array(p) for p in refined.povm],
            "kappas": real_list(refined.kappas),
            "success_per_state": real_list(refined.success_per_state),
            "matches_canonical": bool(refined.matches_canonical),
            "trace": [list(idx) for idx, _ in refined.refinement_trace],
        }
    return doc


def solve_document(spec, tol):
    """Run the solver for ``spec``; returns (document, exit code)."""
    target = _build(spec, tol)
    head = {"schema_version": SCHEMA_VERSION, "kind": "solution", "mode": spec.mode, "status": "ok"}
    try:
        if spec.mode == "bayes":
            body = _bayes_doc(bayes_risk_n(target, spec.prior))
        elif spec.mode == "minimax":
            two = target.n == 2 and np.array_equal(target.weights, 1.0 - np.eye(2))
            if two:
                sol = minimax_two_state(*target.states, kernel_tol=target.kernel_tol, equalization_tol=target.equalization_tol)
            else:
                sol = minimax_n(target)
            body = _minimax_doc(sol)
        elif spec.mode == "covariant":
            body = _minimax_doc(minimax_covariant(spec.density_matrices()[0], spec.group, gap_tol=target.gap_tol))
        else:
            sol = unambiguous_minimax(target)
            refined = None if sol.unique else refine(sol, dual_basis(target), target)
            body = _unambiguous_doc(sol, refined)
    except ConvergenceFailure as exc:
        partial = exc.partial
        body = {"povm": []}
        if partial is not None:
            body = _bayes_doc(partial) if spec.mode == "bayes" else _minimax_doc(partial)
        head["status"] = "convergence_failure"
        body["best_gap"] = float(exc.best_gap)
        body["message"] = str(exc)
        return {**head, **body}, EXIT_CONVERGENCE
    except (ValueError, DiscriminationError) as exc:
        raise InputError(str(exc)) from None
    return {**head, **body}, EXIT_OK


def _text_solution(doc):
    lines = [f"mode: {doc['mode']}", f"status: {doc['status']}"]
    for key in ("risk", "kappa", "gap", "best_gap", "equalized", "unique", "witnesses"):
        if key in doc:
            lines.append(f"{key}: {doc[key]}")
    for key in ("prior", "worst_prior", "per_state_risk", "success_per_state"):
        if key in doc:
            lines.append(f"{key}: " + " ".join(f"{x:.12g}" for x in doc[key]))
    for j, p in enumerate(doc["povm"]):
        m = decode_array(p)
        lines.append(f"P[{j}]: " + np.array2string(m, precision=10, suppress_small=True).replace("\n", ""))
    if "refined" in doc:
        r = doc["refined"]
        lines.append("refined kappas: " + " ".join(f"{x:.12g}" for x in r["kappas"]))
        lines.append(f"refined matches canonical: {r['matches_canonical']}")
    return "\n".join(lines) + "\n"


class Check:
    def __init__(self):
        self.rows = []

    def __call__(self, name, passed, residual, tol):
        self.rows.append({"check": name, "passed": bool(passed), "residual": float(residual), "tol": float(tol)})

    @property
    def ok(self):
        return all(r["passed"] for r in self.rows)


def _povm_checks(check, elements, dim, label="povm"):
    if not elements:
        check(f"{label}_nonempty", False, 0, 0)
        return None
    arr = np.stack(elements)
    if arr.shape[1:] != (dim, dim):
        check(f"{label}_dimension", False, arr.shape[-1], dim)
        return None
    herm = max_abs(arr - np.conj(np.swapaxes(arr, -1, -2)))
    check(f"{label}_hermitian", herm <= 1e-9, herm, 1e-9)
    h = 0.5 * (arr + np.conj(np.swapaxes(arr, -1, -2)))
    lam = float(np.linalg.eigvalsh(h)[:, 0].min())
    check(f"{label}_positivity", lam >= -POSITIVITY_TOL, lam, -POSITIVITY_TOL)
    comp = max_abs(h.sum(axis=0) - np.eye(dim))
    check(f"{label}_completeness", comp <= COMPLETENESS_TOL, comp, COMPLETENESS_TOL)
    return Povm(tuple(h), validate=False)


def verify_document(sol_doc, spec, tol):
    """Re-check every claim of a solution document against its problem."""
    check = Check()
    try:
        validate(sol_doc, SOLUTION_SCHEMA)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if sol_doc["mode"] != spec.mode:
        raise InputError(f"solution mode {sol_doc['mode']!r} does not match problem mode {spec.mode!r}")
    check("status_ok", sol_doc["status"] == "ok", 0, 0)
    target = _build(spec, tol)
    elements = [decode_array(p) for p in sol_doc["povm"]]
    if spec.mode == "unambiguous":
        _verify_unambiguous(check, sol_doc, target, elements)
    else:
        _verify_risk(check, sol_doc, spec, target, elements)
    return check


def _verify_risk(check, doc, spec, problem, elements):
    n = problem.n
    povm = _povm_checks(check, elements, problem.dim)
    if povm is None:
        return
    check("outcome_count", povm.n == n, povm.n, n)
    if povm.n != n:
        return
    scale = max(float(problem.weights.max()), 1e-300)
    per_state = problem.per_state_risk(povm)
    if spec.mode == "bayes":
        risk = float(spec.prior @ per_state)
    else:
        risk = float(per_state.max())
    err = abs(risk - doc.get("risk", np.nan))
    check("risk_matches_povm", err <= RISK_TOL * scale, err, RISK_TOL * scale)
    if "certificate" not in doc:
        check("certificate_present", False, 0, 0)
        return
    c = doc["certificate"]
    y = decode_array(c["y"])
    prior = np.asarray(c["prior"], dtype=float)
    if y.shape != (problem.dim, problem.dim) or prior.size != n:
        check("certificate_shape", False, 0, 0)
        return
    psum = abs(prior.sum() - 1.0)
    check("certificate_prior", psum <= 1e-12 and prior.min() >= 0, psum, 1e-12)
    if spec.mode == "bayes":
        drift = max_abs(prior - spec.prior)
        check("certificate_prior_matches", drift <= 1e-12, drift, 1e-12)
    cert = DualCertificate(0.5 * (y + y.conj().T), prior / prior.sum())
    slack = float(certificate_slack(cert, problem).min())
    check("certificate_feasibility", slack >= -FEASIBILITY_TOL, slack, -FEASIBILITY_TOL)
    bound_err = abs(cert.bound - c["bound"])
    check("certificate_bound", bound_err <= 1e-10 * scale, bound_err, 1e-10 * scale)
    gap = risk - cert.bound
    check("weak_duality", gap >= -FEASIBILITY_TOL * problem.dim * scale, gap, -FEASIBILITY_TOL * problem.dim * scale)
    check("duality_gap", gap <= problem.gap_tol * scale, gap, problem.gap_tol * scale)
    if spec.mode == "covariant":
        spread = float(np.ptp(per_state))
        check("covariant_equal_risk", spread <= COVARIANT_TOL, spread, COVARIANT_TOL)
    elif spec.mode == "minimax" and doc.get("equalized", False):
        support = np.asarray(doc.get("worst_prior", prior)) > 1e-6
        spread = float(np.ptp(per_state[support])) if support.any() else 0.0
        limit = max(problem.equalization_tol, problem.gap_tol * scale)
        check("equalization", spread <= limit, spread, limit)


def _unambiguity(states, elements):
    n = states.n
    worst = 0.0
    for j in range(n):
        for i in range(n):
            if i != j:
                v = states.vectors[i]
                worst = max(worst, float(np.vdot(v, elements[j] @ v).real))
    return worst


def _verify_unambiguous(check, doc, states, elements):
    n = states.n
    povm = _povm_checks(check, elements, states.dim)
    if povm is None:
        return
    check("outcome_count", povm.n == n + 1, povm.n, n + 1)
    if povm.n != n + 1:
        return
    cross = _unambiguity(states, povm.elements)
    check("unambiguity", cross <= UNAMBIGUITY_TOL, cross, UNAMBIGUITY_TOL)
    success = np.array([np.vdot(v, p @ v).real for v, p in zip(states.vectors, povm.elements)])
    kappa = float(doc.get("kappa", np.nan))
    spread = float(np.max(np.abs(success - kappa)))
    check("success_equals_kappa", spread <= KAPPA_TOL, spread, KAPPA_TOL)
    dual = dual_basis(states)
    frame = dual.projectors().sum(axis=0)
    bumped = float(np.linalg.eigvalsh(np.eye(states.dim) - kappa * (1 + 1e-6) * frame)[0])
    check("kappa_maximal", bumped < 0, bumped, 0.0)
    canonical = unambiguous_minimax(states)
    unique, witnesses = uniqueness_test(canonical, dual)
    check("uniqueness_flag", doc.get("unique") == unique, 0, 0)
    check("witnesses", list(doc.get("witnesses", [])) == list(witnesses), 0, 0)
    if "refined" in doc:
        r = doc["refined"]
        rpovm = _povm_checks(check, [decode_array(p) for p in r["povm"]], states.dim, label="refined_povm")
        if rpovm is None or rpovm.n != n + 1:
            check("refined_outcome_count", False, 0, n + 1)
            return
        rcross = _unambiguity(states, rpovm.elements)
        check("refined_unambiguity", rcross <= UNAMBIGUITY_TOL, rcross, UNAMBIGUITY_TOL)
        rsuccess = np.array([np.vdot(v, p @ v).real for v, p in zip(states.vectors, rpovm.elements)])
        drop = float(np.max(success - rsuccess))
        check("refined_no_decrease", drop <= KAPPA_TOL, drop, KAPPA_TOL)
        shift = abs(float(rsuccess.min()) - kappa)
        check("refined_min_unchanged", shift <= KAPPA_TOL, shift, KAPPA_TOL)


def _emit(text, args):
    sys.stdout.write(text)
    if getattr(args, "save", None):
        with open(args.save, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_solve(args):
    spec, tol = _load_problem(args.problem, args)
    doc, code = solve_document(spec, tol)
    structured = dumps(doc)
    if args.save:
        with open(args.save, "w", encoding="utf-8") as fh:
            fh.write(structured)
    sys.stdout.write(structured if args.output == "structured" else _text_solution(doc))
    if code == EXIT_CONVERGENCE:
        print(f"warning: {doc.get('message', 'did not converge')}", file=sys.stderr)
    return code


def cmd_verify(args):
    spec, tol = _load_problem(args.problem, args)
    check = verify_document(_load_json(args.solution), spec, tol)
    if args.output == "structured":
        sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "kind": "verification", "passed": check.ok, "checks": check.rows}))
    else:
        for r in check.rows:
            flag = "PASS" if r["passed"] else "FAIL"
            sys.stdout.write(f"{flag} {r['check']}: residual={r['residual']:.3e} tol={r['tol']:.1e}\n")
        sys.stdout.write(f"{'verified' if check.ok else 'verification failed'}\n")
    return EXIT_OK if check.ok else EXIT_VERIFY


def cmd_oracle(args):
    spec, tol = _load_problem(args.problem, args)
    if spec.mode == "unambiguous":
        raise InputError("the oracle bounds minimax risk; unambiguous problems are not supported")
    problem = _build(spec, tol)
    try:
        if args.exhaustive:
            step = args.grid_step if args.grid_step is not None else 1 / 300
            report = diagonal_exhaustive(problem, step)
        else:
            report = brute_force_minimax(problem, n_samples=args.samples, grid_step=args.grid_step, seed=args.seed)
    except (ValueError, DiscriminationError) as exc:
        raise InputError(str(exc)) from None
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "oracle_report",
        "method": "diagonal_exhaustive" if args.exhaustive else "sampling",
        "primal_bound": report.primal_bound,
        "dual_bound": report.dual_bound,
        "sandwich_width": report.sandwich_width,
        "samples": report.samples,
        "seed": report.seed,
        "best_prior": real_list(report.best_prior),
        "best_povm": [encode_array(p) for p in report.best_povm],
    }
    if args.output == "structured":
        _emit(dumps(doc), args)
    else:
        _emit(
            f"primal_bound: {report.primal_bound:.12g}\ndual_bound: {report.dual_bound:.12g}\n"
            f"sandwich_width: {report.sandwich_width:.3e}\nsamples: {report.samples}\nseed: {report.seed}\n",
            args,
        )
    return EXIT_OK


FIXTURES = "qdiscrim.fixtures"


def fixture_names():
    return sorted(p.name[: -len(".json")] for p in resources.files(FIXTURES).iterdir() if p.name.endswith(".json"))


def fixture_path(name):
    path = resources.files(FIXTURES) / f"{name}.json"
    if not path.is_file():
        raise InputError(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    return str(path)


def cmd_fixture(args):
    if args.name is None:
        sys.stdout.write("\n".join(fixture_names()) + "\n")
    else:
        sys.stdout.write(fixture_path(args.name) + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="qdiscrim", description="Optimal quantum state discrimination.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, help="duality gap tolerance (default 1e-7)")
        p.add_argument("--grid-step", type=float, help="prior grid step")
        p.add_argument("--output", choices=("text", "structured"), default="structured")

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("problem")
    p.add_argument("--save", help="also write the structured solution to this file")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="re-check a solution against its problem")
    p.add_argument("solution")
    p.add_argument("problem")
    common(p)
    p.set_defaults(func=cmd_verify, output="text")

    p = sub.add_parser("oracle", help="brute-force bounds on the minimax risk")
    p.add_argument("problem")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", action="store_true", help="grid search over diagonal POVMs")
    p.add_argument("--save", help="also write the report to this file")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("fixture", help="list bundled problems or print the path of one")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        return _fail("--tol must be positive")
    if getattr(args, "grid_step", None) is not None and not 0 < args.grid_step <= 1:
        return _fail("--grid-step must lie in (0, 1]")
    if getattr(args, "samples", 1) < 1:
        return _fail("--samples must be at least 1")
    try:
        return args.func(args)
    except InputError as exc:
        return _fail(str(exc))


def _fail(message):
    print(json.dumps({"error": "input", "message": " ".join(str(message).split())}), file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
