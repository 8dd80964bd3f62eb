"""Command-line front end.

Subcommands: ``compile``, ``eval``, ``lawmap``, ``bn``, ``check``.
Exit codes: 0 success, 1 parse error, 2 compile error, 3 incomplete or
invalid scenario, 4 inference error, 5 rulepack integrity error.
Outputs are byte-stable for identical inputs; ``--timestamps`` opts into
wall-clock metadata on reports.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, bayes_net, boolean_core, compliance, lawmap, rulepack
from .boolean_core import (
    CyclicDefinitionError,
    NoOutcomeError,
    TooManyVariablesError,
    UnboundVariableError,
    compile_rule,
    equations_to_text,
    evaluate,
)
from .rule_dsl import (
    NamingConflictError,
    RuleSyntaxError,
    assign_variables,
    load_rule_file,
    parse_rule,
)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_COMPILE = 2
EXIT_SCENARIO = 3
EXIT_INFERENCE = 4
EXIT_RULEPACK = 5

_PARSE_ERRORS = (RuleSyntaxError, boolean_core.EquationSyntaxError)
_COMPILE_ERRORS = (UnboundVariableError, NoOutcomeError, NamingConflictError,
                   TooManyVariablesError)


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def _load_compiled(rule_path: str):
    source = load_rule_file(rule_path)
    ast = parse_rule(source)
    table = assign_variables(ast)
    return source, ast, compile_rule(ast, table)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_facts(path: str, rule_id: str | None = None) -> compliance.Scenario:
    scenario = compliance.load_scenario(path)
    if rule_id is not None and scenario.rule_id != rule_id:
        raise ValueError(
            f"scenario targets rule {scenario.rule_id!r}, not {rule_id!r}"
        )
    return scenario


def cmd_compile(args: argparse.Namespace) -> int:
    try:
        _, _, eqs = _load_compiled(args.rule)
    except _PARSE_ERRORS as exc:
        return _fail(EXIT_PARSE, str(exc))
    except _COMPILE_ERRORS as exc:
        return _fail(EXIT_COMPILE, f"error: {exc}")
    except OSError as exc:
        return _fail(EXIT_PARSE, f"error: {exc}")
    _write(equations_to_text(eqs, ascii_ops=args.ascii), args.out)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        _, _, eqs = _load_compiled(args.rule)
    except _PARSE_ERRORS as exc:
        return _fail(EXIT_PARSE, str(exc))
    except _COMPILE_ERRORS as exc:
        return _fail(EXIT_COMPILE, f"error: {exc}")
    except OSError as exc:
        return _fail(EXIT_PARSE, f"error: {exc}")
    try:
        scenario = _load_facts(args.scenario, rule_id=eqs.rule_id)
        unknown = tuple(
            v for v in scenario.facts if v not in eqs.table.variables
        )
        if unknown:
            raise compliance.UnknownScenarioVariableError(eqs.rule_id, unknown)
    except (OSError, ValueError, KeyError,
            compliance.UnknownScenarioVariableError) as exc:
        return _fail(EXIT_SCENARIO, f"error: {exc}")
    if not scenario.facts:
        print("warning: scenario provides no facts; all decisions unknown",
              file=sys.stderr)
    results = evaluate(eqs, dict(scenario.facts))
    lines = [
        f"{decision}: {compliance.kleene_name(value)} ({eqs.table.describe(decision)})"
        for decision, value in results.items()
    ]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_lawmap(args: argparse.Namespace) -> int:
    try:
        source, ast, eqs = _load_compiled(args.rule)
    except _PARSE_ERRORS as exc:
        return _fail(EXIT_PARSE, str(exc))
    except _COMPILE_ERRORS as exc:
        return _fail(EXIT_COMPILE, f"error: {exc}")
    except OSError as exc:
        return _fail(EXIT_PARSE, f"error: {exc}")
    meta = {"title": source.title} if source.title else {}
    for i, cite in enumerate(source.citations):
        meta[f"cites.{i}"] = cite
    graph = lawmap.build_lawmap(eqs, ast, meta=meta)
    highlight = None
    if args.trace:
        try:
            scenario = _load_facts(args.trace, rule_id=eqs.rule_id)
            highlight = lawmap.trace_path(graph, scenario.facts)
        except lawmap.IncompleteAssignmentError as exc:
            return _fail(EXIT_SCENARIO, f"error: {exc}")
        except (OSError, ValueError, KeyError) as exc:
            return _fail(EXIT_SCENARIO, f"error: {exc}")
    if args.format == "json":
        text = lawmap.export_json(graph)
    else:
        text = lawmap.export_dot(graph, highlight=highlight)
    _write(text, args.out)
    return EXIT_OK


def _parse_evidence(text: str) -> dict[str, bool]:
    evidence: dict[str, bool] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ValueError(f"evidence must be name=true|false, got {item!r}")
        name, _, raw = item.partition("=")
        raw = raw.strip().lower()
        if raw not in ("true", "false"):
            raise ValueError(f"evidence value for {name.strip()!r} must be true or false")
        evidence[name.strip()] = raw == "true"
    return evidence


def cmd_bn(args: argparse.Namespace) -> int:
    priors: dict[str, float] = {}
    if args.priors:
        try:
            priors = {
                str(k): float(v)
                for k, v in json.loads(Path(args.priors).read_text("utf-8")).items()
            }
        except (OSError, ValueError) as exc:
            return _fail(EXIT_INFERENCE, f"error: {exc}")
    lines: list[str] = []
    total = passed = 0
    for rule_path in args.rules:
        try:
            _, _, eqs = _load_compiled(rule_path)
        except _PARSE_ERRORS as exc:
            return _fail(EXIT_PARSE, str(exc))
        except _COMPILE_ERRORS as exc:
            return _fail(EXIT_COMPILE, f"error: {exc}")
        except OSError as exc:
            return _fail(EXIT_PARSE, f"error: {exc}")
        try:
            net = bayes_net.build_bn(eqs, priors={
                k: v for k, v in priors.items() if k in eqs.table.variables
            })
        except (CyclicDefinitionError, ValueError) as exc:
            return _fail(EXIT_INFERENCE, f"error: {exc}")
        if args.infer is not None:
            try:
                evidence = _parse_evidence(args.infer)
                posteriors = bayes_net.infer(net, evidence)
            except bayes_net.ImpossibleEvidenceError as exc:
                return _fail(EXIT_INFERENCE, f"error: {exc}")
            except (KeyError, ValueError) as exc:
                return _fail(EXIT_INFERENCE, f"error: {exc}")
            for decision in eqs.decision_ids():
                lines.append(f"P({decision}=true) = {posteriors[decision]:.9f}")
        elif args.export:
            lines.append(bayes_net.net_to_json(net).rstrip("\n"))
        else:
            try:
                report = bayes_net.validate_bn(net, eqs)
            except TooManyVariablesError as exc:
                return _fail(EXIT_INFERENCE, f"error: {exc}")
            total += report.equations_total
            passed += report.equations_passed
            status = "ok" if report.ok else "DIVERGED"
            lines.append(
                f"rule {eqs.rule_id}: {report.equations_passed}/{report.equations_total} "
                f"equations validated over {report.assignments_checked} assignments [{status}]"
            )
            for divergence in report.divergences:
                lines.append(
                    f"  divergence on {divergence.decision} at {divergence.evidence}: "
                    f"expected {divergence.expected}, posterior {divergence.posterior:.9f}"
                )
    if args.infer is None and not args.export:
        lines.append(f"{passed}/{total} equations validated")
    _write("\n".join(lines) + "\n", args.out)
    if args.infer is None and not args.export and passed != total:
        return EXIT_INFERENCE
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    pack_arg = args.rulepack
    profile_args = list(args.profiles)
    if pack_arg is not None and not Path(pack_arg).is_dir():
        # argparse cannot tell an omitted pack dir from the first profile
        profile_args.insert(0, pack_arg)
        pack_arg = None
    pack_dir = pack_arg or os.environ.get("LEXROAD_RULEPACK")
    if not pack_dir:
        pack_dir = str(rulepack.default_pack_dir())
    try:
        pack = rulepack.load_rulepack(pack_dir)
    except rulepack.GoldenMismatchError as exc:
        return _fail(EXIT_RULEPACK, f"error: {exc}")
    except _PARSE_ERRORS as exc:
        return _fail(EXIT_RULEPACK, f"error: {exc}")
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_RULEPACK, f"error: {exc}")
    try:
        profile_paths = [Path(p) for p in profile_args]
        profiles = [rulepack.load_profile(p) for p in profile_paths]
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_RULEPACK, f"error: {exc}")
    scenarios = []
    for path in args.scenario or []:
        try:
            scenarios.append(_load_facts(path))
        except (OSError, ValueError, KeyError) as exc:
            return _fail(EXIT_SCENARIO, f"error: {exc}")
    try:
        report = compliance.build_report(
            pack,
            profiles,
            profile_paths=profile_paths,
            scenarios=scenarios,
            timestamps=args.timestamps,
        )
    except rulepack.IncompleteProfileError as exc:
        return _fail(EXIT_RULEPACK, f"error: {exc}")
    except (compliance.UnknownScenarioVariableError, KeyError) as exc:
        return _fail(EXIT_SCENARIO, f"error: {exc}")
    if args.format == "json":
        sys.stdout.write(compliance.report_to_json(report))
    else:
        sys.stdout.write(compliance.render_text(report))
    if args.out:
        Path(args.out).write_text(compliance.report_to_json(report), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexroad",
        description="Compile structured-English road rules, draw their decision "
        "flow, validate the logic probabilistically and check vehicle "
        "capability profiles.",
    )
    parser.add_argument("--version", action="version", version=f"lexroad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a .rule file to Boolean equations")
    p.add_argument("rule")
    p.add_argument("--ascii", action="store_true", help="use & | ! instead of ∧ ∨ ¬")
    p.add_argument("--out", help="write output to a file instead of stdout")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("eval", help="evaluate a scenario against a rule")
    p.add_argument("rule")
    p.add_argument("scenario", help="JSON scenario file (absent facts are unknown)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("lawmap", help="export a rule's decision-flow graph")
    p.add_argument("rule")
    p.add_argument("-f", "--format", choices=("dot", "json"), default="dot")
    p.add_argument("--trace", help="scenario file; highlights the realized path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lawmap)

    p = sub.add_parser("bn", help="build, validate or query the rule's Bayesian network")
    p.add_argument("rules", nargs="+")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--validate", action="store_true",
                       help="check the net against the Boolean semantics (default)")
    group.add_argument("--infer", metavar="EV",
                       help="comma-separated evidence, e.g. u=true,p=true")
    group.add_argument("--export", action="store_true", help="emit the net as JSON")
    p.add_argument("--priors", help="JSON file of fact priors (default 0.5)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bn)

    p = sub.add_parser("check", help="run capability profiles against the rulepack")
    p.add_argument("rulepack", nargs="?",
                   help="rulepack directory (default: $LEXROAD_RULEPACK or the shipped pack)")
    p.add_argument("profiles", nargs="+", help="vehicle profile JSON files")
    p.add_argument("--scenario", action="append", help="fact scenario to evaluate")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="also write the JSON report here")
    p.add_argument("--timestamps", action="store_true",
                   help="include generation time in the report")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    # matrix marks and equation operators are non-ASCII; don't let a C
    # locale turn them into encode errors
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    args = build_parser().parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    raise SystemExit(main())
