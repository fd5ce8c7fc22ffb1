"""Deterministic command line front end.

Every command reads a system document, writes canonical JSON to standard
output and signals its result through the exit code: 0 when the checked
property holds or the requested artifact was produced, 1 when the
property fails (with a witness in the payload), 2 for invalid input with
a structured error on standard error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .abelian import (
    EqualWeightPair,
    LocallyConstantCocycle,
    ViolationWitness,
    generate_cocycle,
    solve_finite_gamma,
    solve_free_abelian,
    verify_solution,
    verify_vanishing,
)
from .errors import (
    AlphaNotConstant,
    CocycleObstruction,
    DocumentError,
    LivsicError,
    NotAHomomorphism,
)
from .matrix import (
    MatrixCocycle,
    check_distortion_assumption,
    estimate_distortion,
    make_matrix_cocycle,
    solve_matrix_finite,
    verify_matrix_solution,
)
from .serialization import (
    SolutionEnvelope,
    SystemEnvelope,
    canonical_json,
    class_tag_doc,
    error_doc,
    fraction_to_str,
    make_provenance,
    matrix_witness_doc,
    pair_witness_doc,
    parse_rational,
    parse_solution_document,
    parse_system_document,
    parse_word_key,
    solution_to_doc,
    system_to_doc,
    transitivity_doc,
    violation_witness_doc,
    word_to_key,
)
from .sft import enumerate_periodic_orbits, validate_sft
from .skew import check_transitivity, enumerate_trivial_class_orbits, frobenius_class


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="livsic",
        description="Cohomology and transitivity toolkit for group "
        "extensions of subshifts of finite type.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("system", help="path to a system document")
        return p

    add("validate", "parse and validate a system document")
    add("check-transitivity", "decide transitivity of the skew product")

    p = add("orbits", "list primitive periodic orbits with class tags")
    p.add_argument("--max-period", type=int, required=True)
    p.add_argument("--trivial-only", action="store_true")

    p = add("verify-vanishing", "check sums over trivial-class orbits")
    p.add_argument("--max-period", type=int, required=True)

    p = add("solve", "solve the cohomological equation")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="residual tolerance for matrix cocycles")
    p.add_argument("--out", help="also write the solution document here")

    p = add("verify-solution", "recheck a solution document against the system")
    p.add_argument("--solution", required=True)

    p = add("generate", "build a solvable rational cocycle into the document")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--u", help="JSON file mapping blocks to rationals")
    src.add_argument("--random", action="store_true",
                     help="draw u at random (requires --seed)")
    p.add_argument("--alpha", default="0",
                   help='"0" or comma separated rationals, one per rank')
    p.add_argument("--seed", type=int)
    p.add_argument("--range", type=int, default=1, dest="block_range")
    p.add_argument("--out", help="also write the generated document here")

    p = add("distortion", "estimate expansion rates of a matrix cocycle")
    p.add_argument("--depth", type=int, required=True)
    alg = p.add_mutually_exclusive_group()
    alg.add_argument("--algebra", help="JSON file with a Lie algebra basis")
    alg.add_argument("--ambient", action="store_true",
                     help="ignore any declared algebra")

    p = add("check-distortion", "compare a Holder exponent with the threshold")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--depth", type=int, default=6)
    return parser


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_system(path: str) -> SystemEnvelope:
    return parse_system_document(_load_json(path))


def _require_rational(env: SystemEnvelope) -> LocallyConstantCocycle:
    if not isinstance(env.cocycle, LocallyConstantCocycle):
        raise DocumentError("/cocycle", "this command needs a rational cocycle")
    return env.cocycle


def _require_matrix(env: SystemEnvelope) -> MatrixCocycle:
    if not isinstance(env.cocycle, MatrixCocycle):
        raise DocumentError("/cocycle", "this command needs a matrix cocycle")
    return env.cocycle


def _emit(payload, out_path: str | None = None) -> None:
    text = canonical_json(payload)
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _witness_doc(witness, k: int) -> dict:
    if isinstance(witness, ViolationWitness):
        return violation_witness_doc(witness, k)
    if isinstance(witness, EqualWeightPair):
        return pair_witness_doc(witness, k)
    return matrix_witness_doc(witness, k)


def _cmd_validate(args, command_line: str) -> int:
    env = _load_system(args.system)
    report = validate_sft(env.system.sft)
    group = env.system.group
    cocycle = env.cocycle
    _emit(
        {
            "ok": True,
            "k": env.system.sft.k,
            "irreducible": report.irreducible,
            "aperiodic": report.aperiodic,
            "period": report.period,
            "group": {
                "type": group.variant,
                "order": group.order,
                "rank": None if group.is_finite else group.rank,
            },
            "cocycle": None
            if cocycle is None
            else {
                "kind": "matrix" if isinstance(cocycle, MatrixCocycle) else "rational",
                "range": cocycle.block_range,
            },
        }
    )
    return 0


def _cmd_check_transitivity(args, command_line: str) -> int:
    env = _load_system(args.system)
    verdict = check_transitivity(env.system)
    _emit(transitivity_doc(verdict, env.system.sft.k))
    return 0 if verdict.status == "transitive" else 1


def _cmd_orbits(args, command_line: str) -> int:
    env = _load_system(args.system)
    system = env.system
    k = system.sft.k
    if args.trivial_only:
        pairs = enumerate_trivial_class_orbits(system, args.max_period)
    else:
        pairs = [
            (orbit, frobenius_class(system, orbit))
            for orbit in enumerate_periodic_orbits(system.sft, args.max_period)
        ]
    _emit(
        {
            "max_period": args.max_period,
            "count": len(pairs),
            "orbits": [
                {
                    "word": word_to_key(orbit.word, k),
                    "period": orbit.period,
                    "class": class_tag_doc(tag, system.group),
                }
                for orbit, tag in pairs
            ],
        }
    )
    return 0


def _cmd_verify_vanishing(args, command_line: str) -> int:
    env = _load_system(args.system)
    cocycle = _require_rational(env)
    witness = verify_vanishing(env.system, cocycle, args.max_period)
    if witness is None:
        _emit({"holds": True, "max_period": args.max_period})
        return 0
    _emit(
        {
            "holds": False,
            "max_period": args.max_period,
            "witness": violation_witness_doc(witness, env.system.sft.k),
        }
    )
    return 1


def _cmd_solve(args, command_line: str) -> int:
    env = _load_system(args.system)
    system = env.system
    k = system.sft.k
    cocycle = env.cocycle
    if cocycle is None:
        raise DocumentError("/cocycle", "missing field")
    try:
        if isinstance(cocycle, MatrixCocycle):
            kind = "matrix"
            solution = solve_matrix_finite(system, cocycle, tol=args.tol)
        elif system.group.is_finite:
            kind = "rational"
            solution = solve_finite_gamma(system, cocycle)
        else:
            kind = "rational"
            solution = solve_free_abelian(system, cocycle)
    except CocycleObstruction as exc:
        _emit({"solvable": False, "witness": _witness_doc(exc.witness, k)})
        return 1
    except AlphaNotConstant as exc:
        block, eta, gamma, deviation = exc.witness
        _emit(
            {
                "solvable": False,
                "reason": "alpha_not_constant",
                "witness": {
                    "block": word_to_key(block, k),
                    "eta": eta,
                    "gamma": gamma,
                    "deviation": float(deviation),
                },
            }
        )
        return 1
    except NotAHomomorphism as exc:
        _emit(
            {"solvable": False, "reason": "not_a_homomorphism", "message": str(exc)}
        )
        return 1
    envelope = SolutionEnvelope(
        kind=kind,
        k=k,
        solution=solution,
        provenance=make_provenance(command_line),
    )
    _emit(solution_to_doc(envelope), args.out)
    return 0


def _cmd_verify_solution(args, command_line: str) -> int:
    env = _load_system(args.system)
    sol_env = parse_solution_document(_load_json(args.solution))
    system = env.system
    k = system.sft.k
    if sol_env.kind == "rational":
        cocycle = _require_rational(env)
        report = verify_solution(system, cocycle, sol_env.solution)
        _emit(
            {
                "certified": report.certified,
                "edges_checked": report.edges_checked,
                "failures": [
                    {"word": word_to_key(w, k), "residual": fraction_to_str(res)}
                    for w, res in report.failures
                ],
            }
        )
        return 0 if report.certified else 1
    cocycle = _require_matrix(env)
    solution = sol_env.solution
    # Recheck under the same tolerance the original certification used.
    check_tol = solution.certificate.tol if solution.certificate else solution.tol
    report = verify_matrix_solution(system, cocycle, solution, tol=check_tol)
    _emit(
        {
            "certified": report.certified,
            "edges_checked": report.edges_checked,
            "max_residual": report.max_residual,
            "hom_defect": report.hom_defect,
            "centrality_defect": report.centrality_defect,
            "tolerance": report.tol,
        }
    )
    return 0 if report.certified else 1


def _parse_alpha_spec(text: str):
    text = text.strip()
    if text in ("", "0"):
        return None
    return tuple(parse_rational(part.strip(), "/alpha") for part in text.split(","))


def _cmd_generate(args, command_line: str) -> int:
    env = _load_system(args.system)
    system = env.system
    k = system.sft.k
    alpha = _parse_alpha_spec(args.alpha)
    u = None
    if args.u is not None:
        raw = _load_json(args.u)
        if not isinstance(raw, dict):
            raise DocumentError("", "u file must be an object keyed by blocks")
        u = {
            parse_word_key(key, k, f"/{key}"): parse_rational(value, f"/{key}")
            for key, value in raw.items()
        }
    cocycle = generate_cocycle(
        system, u, alpha, block_range=args.block_range, seed=args.seed
    )
    out_env = SystemEnvelope(system=system, cocycle=cocycle, group_doc=env.group_doc)
    _emit(system_to_doc(out_env), args.out)
    return 0


def _cmd_distortion(args, command_line: str) -> int:
    env = _load_system(args.system)
    cocycle = _require_matrix(env)
    if args.ambient:
        cocycle = replace(cocycle, algebra=None)
    elif args.algebra is not None:
        cocycle = make_matrix_cocycle(
            cocycle.sft,
            cocycle.block_range,
            cocycle.values,
            algebra=_load_json(args.algebra),
        )
    report = estimate_distortion(cocycle, args.depth)
    _emit(
        {
            "depth": report.n_max,
            "mu_s": report.mu_s,
            "mu_u": report.mu_u,
            "mu_s_by_n": list(report.mu_s_by_n),
            "mu_u_by_n": list(report.mu_u_by_n),
            "theta_threshold": report.theta_threshold,
            "algebra_dim": report.algebra_dim,
        }
    )
    return 0


def _cmd_check_distortion(args, command_line: str) -> int:
    env = _load_system(args.system)
    cocycle = _require_matrix(env)
    report = estimate_distortion(cocycle, args.depth)
    verdict = check_distortion_assumption(report, args.theta)
    _emit(
        {
            "status": verdict.status,
            "theta": verdict.theta,
            "threshold": verdict.threshold,
            "mu_s": verdict.mu_s,
            "mu_u": verdict.mu_u,
            "depth": verdict.n_max,
        }
    )
    return 0 if verdict.status == "satisfied" else 1


_HANDLERS = {
    "validate": _cmd_validate,
    "check-transitivity": _cmd_check_transitivity,
    "orbits": _cmd_orbits,
    "verify-vanishing": _cmd_verify_vanishing,
    "solve": _cmd_solve,
    "verify-solution": _cmd_verify_solution,
    "generate": _cmd_generate,
    "distortion": _cmd_distortion,
    "check-distortion": _cmd_check_distortion,
}


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = _build_parser().parse_args(argv)
    command_line = " ".join(["livsic", *argv])
    try:
        return _HANDLERS[args.command](args, command_line)
    except json.JSONDecodeError as exc:
        sys.stderr.write(
            canonical_json({"error": "JSONDecodeError", "message": str(exc)})
        )
        return 2
    except OSError as exc:
        sys.stderr.write(canonical_json({"error": "IOError", "message": str(exc)}))
        return 2
    except LivsicError as exc:
        sys.stderr.write(canonical_json(error_doc(exc)))
        return 2


if __name__ == "__main__":
    sys.exit(main())
