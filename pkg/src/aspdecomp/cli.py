"""Command-line interface: ground, rewrite, check and bench."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, field

from .errors import (
    ASPError,
    BudgetExceeded,
    EvaluationError,
    ParseError,
    SafetyError,
)
from .grounder import GroundConfig, ground_program
from .hypergraph import HEURISTICS, TDConfig
from .oracle import DEFAULT_ATOM_BUDGET, brute_force_answer_sets, naive_ground, project
from .parser import parse_program, render_program
from .smart import MODES, SDConfig, rewrite_program
from .syntax import Program
from .synthetic import chain_program

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4

BENCH_COLUMNS = ("problem", "instance", "mode", "grounded", "time_ms", "ground_rules", "substitution_attempts")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    mode: str = "smart"
    sd: SDConfig = field(default_factory=SDConfig)
    output: str | None = None
    report: str | None = None
    decision_log: str | None = None
    timeout_ms: int | None = None
    max_ground_rules: int | None = None
    explain_costs: bool = False

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        try:
            td = TDConfig(args.td_heuristic, args.seed)
            sd = SDConfig(args.ratio_threshold, args.max_generations, args.non_improving_limit,
                          args.body_fitness_limit, td)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return cls(args.command, list(getattr(args, "files", []) or []), args.decomposition, sd,
                   args.output, args.report, args.decision_log, args.timeout_ms,
                   args.max_ground_rules, args.explain_costs)

    def ground_config(self, explain=None) -> GroundConfig:
        return GroundConfig(self.sd, self.timeout_ms, self.max_ground_rules, explain)


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--decomposition", choices=MODES, default="smart")
    common.add_argument("--ratio-threshold", type=float, default=0.5)
    common.add_argument("--max-generations", type=_positive_int, default=5)
    common.add_argument("--non-improving-limit", type=_positive_int, default=3)
    common.add_argument("--body-fitness-limit", type=_positive_int, default=10)
    common.add_argument("--td-heuristic", choices=HEURISTICS, default="min-fill")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--decision-log", metavar="PATH", help="write decisions as JSON lines")
    common.add_argument("--report", metavar="PATH", help="write the run report as JSON")
    common.add_argument("--output", "-o", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--timeout-ms", type=_positive_int)
    common.add_argument("--max-ground-rules", type=_positive_int)
    common.add_argument("--explain-costs", action="store_true",
                        help="print per-rule cost estimates to stderr as JSON lines")

    parser = _Parser(prog="aspdecomp", description="ASP grounder with cost-guided rule decomposition.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("ground", "ground a program"),
                       ("rewrite", "print the rewritten non-ground program"),
                       ("check", "compare answer sets of all modes with the naive oracle")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("files", nargs="+", help="program and instance files, concatenated in order")
        if name == "check":
            p.add_argument("--max-atoms", type=_positive_int, default=DEFAULT_ATOM_BUDGET)
    bench = sub.add_parser("bench", parents=[common], help="compare modes, CSV output")
    bench.add_argument("--case", nargs=3, action="append", default=[], metavar=("NAME", "ENCODING", "INSTANCE"))
    bench.add_argument("--chain", type=_positive_int, action="append", default=[], metavar="K",
                       help="chain-join family member with K relations (repeatable)")
    bench.add_argument("--tuples", type=_positive_int, default=200)
    bench.add_argument("--domain", type=_positive_int, default=50)
    bench.add_argument("--instances", type=_positive_int, default=1, help="random instances per chain length")
    bench.add_argument("--modes", default="off,always,smart")
    return parser


def load_program(paths) -> Program:
    rules = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            rules.extend(parse_program(fh.read(), source=path).rules)
    return Program(tuple(rules))


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_decisions(path, decisions):
    if path:
        _write(path, "".join(json.dumps(d.to_json(), sort_keys=True) + "\n" for d in decisions))


def cmd_ground(cfg: RunConfig) -> int:
    program = load_program(cfg.inputs)
    explain = [] if cfg.explain_costs else None
    gp, report = ground_program(program, cfg.mode, cfg.ground_config(explain))
    _write(cfg.output, gp.render())
    if cfg.report:
        _write(cfg.report, json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    _write_decisions(cfg.decision_log, report.per_rule_decisions)
    for record in explain or ():
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def cmd_rewrite(cfg: RunConfig) -> int:
    program = load_program(cfg.inputs)
    if cfg.mode == "smart":
        # statistics only exist while grounding; report the program actually grounded
        _, report = ground_program(program, "smart", cfg.ground_config())
        rewritten, decisions = report.rewritten, report.per_rule_decisions
    else:
        rewritten, decisions = rewrite_program(program, cfg.mode, None, cfg.sd)
    _write(cfg.output, render_program(rewritten))
    _write_decisions(cfg.decision_log, decisions)
    return EXIT_OK


def _original_predicates(program):
    return {name for name, _ in program.predicates()}


def check_program(program, config: GroundConfig, max_atoms=DEFAULT_ATOM_BUDGET) -> dict:
    """Projected answer sets of every mode against the naive instantiation."""
    keep = _original_predicates(program)
    expected = project(brute_force_answer_sets(naive_ground(program), max_atoms), keep)
    result = {"expected": len(expected), "modes": {}}
    for mode in MODES:
        gp, _ = ground_program(program, mode, config)
        got = project(brute_force_answer_sets(gp, max_atoms), keep)
        result["modes"][mode] = got == expected
    result["pass"] = all(result["modes"].values())
    return result


def cmd_check(cfg: RunConfig, max_atoms) -> int:
    program = load_program(cfg.inputs)
    result = check_program(program, cfg.ground_config(), max_atoms)
    lines = [f"{mode}: {'PASS' if ok else 'FAIL'}" for mode, ok in result["modes"].items()]
    lines.append(f"{'PASS' if result['pass'] else 'FAIL'} ({result['expected']} answer sets)")
    _write(cfg.output, "\n".join(lines) + "\n")
    return EXIT_OK if result["pass"] else EXIT_INTERNAL


def bench_rows(cases, modes, config: GroundConfig):
    """Yield one CSV row dict per (case, mode)."""
    for problem, instance, program in cases:
        for mode in modes:
            start = time.perf_counter()
            try:
                gp, report = ground_program(program, mode, config)
                row = {"grounded": "true", "ground_rules": len(gp),
                       "substitution_attempts": report.counters.substitution_attempts}
            except BudgetExceeded:
                row = {"grounded": "false", "ground_rules": "", "substitution_attempts": ""}
            row.update(problem=problem, instance=instance, mode=mode,
                       time_ms=round((time.perf_counter() - start) * 1000.0, 3))
            yield row


def cmd_bench(cfg: RunConfig, args) -> int:
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise UsageError(f"unknown modes: {', '.join(bad) or '(none)'}")
    cases = []
    for name, enc, inst in args.case:
        cases.append((name, inst, load_program([enc, inst])))
    for k in args.chain:
        for i in range(args.instances):
            seed = cfg.sd.td.seed * 1000 + i
            cases.append((f"chain-{k}", f"seed-{seed}", chain_program(k, args.tuples, args.domain, seed)))
    if not cases:
        raise UsageError("bench needs at least one --case or --chain")
    out = sys.stdout if cfg.output in (None, "-") else open(cfg.output, "w", newline="", encoding="utf-8")
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in bench_rows(cases, modes, cfg.ground_config()):
            writer.writerow(row)
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = RunConfig.from_args(args)
        if cfg.command == "ground":
            return cmd_ground(cfg)
        if cfg.command == "rewrite":
            return cmd_rewrite(cfg)
        if cfg.command == "check":
            return cmd_check(cfg, args.max_atoms)
        return cmd_bench(cfg, args)
    except UsageError as exc:
        print(f"aspdecomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"aspdecomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, SafetyError, EvaluationError) as exc:
        print(f"aspdecomp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"aspdecomp: error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ASPError, AssertionError) as exc:
        print(f"aspdecomp: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(run())
