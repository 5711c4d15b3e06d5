"""Command-line surface.

Exit codes: 0 for clean verdicts (well-formed, applied, admissible, all
pairs non-conflicting, valid configuration), 1 for negative verdicts, 2 for
usage or I/O errors.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
import tempfile

from . import analysis as A
from . import documents as D
from .efm import ConfigurationAssignment, check_configuration, check_wellformed, EfmStructureError
from .rules import Admissibility, ApplyStatus, apply, check_admissibility, find_rule_matches
from .smt import DEFAULT_TIMEOUT_MS, SOLVER_ENV_VAR, SolverConfig

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2


class CliError(Exception):
    pass


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    command = None
    if getattr(args, "solver_cmd", None):
        command = tuple(shlex.split(args.solver_cmd))
    elif os.environ.get(SOLVER_ENV_VAR, "").strip():
        command = tuple(shlex.split(os.environ[SOLVER_ENV_VAR]))
    return SolverConfig(command=command, timeout_ms=args.timeout_ms)


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".efmct-", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc


def _add_solver_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--solver-cmd", metavar="CMD",
                        help=f"external solver command (default: ${SOLVER_ENV_VAR} or the bundled adapter)")
    parser.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS, metavar="N",
                        help="per-query solver timeout in milliseconds (default %(default)s)")


def _cmd_check_wf(args: argparse.Namespace) -> int:
    model = D.parse_model(_read(args.model))
    violations = check_wellformed(model)
    if not violations:
        print(f"{args.model}: well-formed")
        return EXIT_OK
    for name, morphism in violations:
        where = ", ".join(f"{a}->{b}" for a, b in sorted(morphism.object_map.items()))
        print(f"{args.model}: violates {name} at {where}")
    return EXIT_NEGATIVE


def _cmd_apply(args: argparse.Namespace) -> int:
    rule = D.parse_rule(_read(args.rule))
    model = D.parse_model(_read(args.model))
    matches = find_rule_matches(rule, model)
    selector: dict[str, str] = {}
    for item in args.match or []:
        if "=" not in item:
            raise CliError(f"--match expects lhs=host, got {item!r}")
        key, _, value = item.partition("=")
        selector[key] = value
    matches = [m for m in matches if all(m.object_map.get(k) == v for k, v in selector.items())]
    if not matches:
        raise CliError("no match satisfies the selector")
    if len(matches) > 1:
        lines = "\n".join(
            "  " + ", ".join(f"{a}={b}" for a, b in sorted(m.object_map.items())) for m in matches
        )
        raise CliError(f"ambiguous match; candidates:\n{lines}\nrefine with --match lhs=host")
    outcome = apply(rule, matches[0], model, _solver_config(args))
    if outcome.status is ApplyStatus.INVALID_DANGLING:
        print(f"invalid application: dangling links {', '.join(outcome.dangling_links)}")
        return EXIT_NEGATIVE
    if outcome.status is ApplyStatus.INVALID_UNSAT:
        print("invalid application: resulting formula is unsatisfiable")
        return EXIT_NEGATIVE
    if outcome.status is ApplyStatus.UNKNOWN_SAT:
        print("warning: satisfiability of the resulting formula is undecided; aborting", file=sys.stderr)
        return EXIT_NEGATIVE
    text = D.serialize_model(outcome.result)
    if args.out:
        _write_atomic(args.out, text)
        print(f"applied {rule.name}; result written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_admissible(args: argparse.Namespace) -> int:
    rule = D.parse_rule(_read(args.rule))
    report = check_admissibility(rule, _solver_config(args))
    print(f"{rule.name}: {report.verdict.value}")
    for clause in report.application_conditions:
        print(f"  application condition: {D.render_term(clause)}")
    for clause in report.effect_conditions:
        print(f"  effect condition: {D.render_term(clause)}")
    return EXIT_OK if report.verdict is Admissibility.ADMISSIBLE else EXIT_NEGATIVE


def _parse_pairs(spec: str, count: int) -> list[tuple[int, int]] | None:
    if spec == "all":
        return None
    try:
        i_text, j_text = spec.split(",")
        i, j = int(i_text) - 1, int(j_text) - 1
    except ValueError as exc:
        raise CliError(f"--pairs expects 'all' or 'i,j', got {spec!r}") from exc
    if not (0 <= i < count and 0 <= j < count):
        raise CliError(f"pair indices out of range 1..{count}")
    return [(i, j)]


def _cmd_analyze(args: argparse.Namespace) -> int:
    rules = [D.parse_rule(_read(path)) for path in args.rules]
    names = [r.name for r in rules]
    if len(set(names)) != len(names):
        raise CliError("rule names must be unique")
    config = _solver_config(args)
    pairs = _parse_pairs(args.pairs, len(rules))
    matrix = A.analyze_ruleset(rules, config, cpa_only=args.cpa_only, pairs=pairs)
    sys.stdout.write(D.render_matrix(matrix, cpa_only=args.cpa_only))
    doc = D.report_doc(matrix, config, cpa_only=args.cpa_only, include_traces=args.trace)
    if args.out:
        _write_atomic(args.out, D.serialize_report(doc))
        print(f"report written to {args.out}")
    any_conflict = any(
        v.verdict is A.PairOutcome.CONFLICTING for v in matrix.entries.values()
    )
    return EXIT_NEGATIVE if any_conflict else EXIT_OK


def _cmd_config_check(args: argparse.Namespace) -> int:
    model = D.parse_model(_read(args.model))
    raw = D.parse_assignment(_read(args.assignment))
    try:
        assignment = ConfigurationAssignment.for_graph(model, raw)
        valid = check_configuration(model, assignment, _solver_config(args))
    except (ValueError, EfmStructureError) as exc:
        raise CliError(str(exc)) from exc
    print("valid configuration" if valid else "invalid configuration")
    return EXIT_OK if valid else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efmct",
        description="Static conflict detection for edits on extended feature models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-wf", help="check a model against the well-formedness constraints")
    p.add_argument("model")
    p.set_defaults(func=_cmd_check_wf)

    p = sub.add_parser("apply", help="apply an edit rule to a model")
    p.add_argument("rule")
    p.add_argument("model")
    p.add_argument("--match", action="append", metavar="LHS=HOST",
                   help="pin a pattern object to a host object (repeatable)")
    p.add_argument("--out", metavar="FILE", help="write the resulting model here")
    _add_solver_options(p)
    p.set_defaults(func=_cmd_apply)

    p = sub.add_parser("admissible", help="check the locality restriction on a rule's formula")
    p.add_argument("rule")
    _add_solver_options(p)
    p.set_defaults(func=_cmd_admissible)

    p = sub.add_parser("analyze", help="pairwise conflict analysis over a rule set")
    p.add_argument("rules", nargs="+", metavar="RULE")
    p.add_argument("--pairs", default="all", metavar="all|i,j",
                   help="restrict to one pair (1-based indices)")
    p.add_argument("--cpa-only", action="store_true",
                   help="report only the structural pre-filter verdicts")
    p.add_argument("--trace", action="store_true", help="include per-context traces in the report")
    p.add_argument("--out", metavar="FILE", help="write the machine-readable report here")
    _add_solver_options(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("config-check", help="check one configuration assignment against a model")
    p.add_argument("model")
    p.add_argument("assignment")
    _add_solver_options(p)
    p.set_defaults(func=_cmd_config_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (CliError, D.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
