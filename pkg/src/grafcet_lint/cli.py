"""Command-line front end: ``grafcet-lint analyze`` and a debug explorer."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

from . import __version__, checks, ingest
from .findings import SEVERITIES, max_severity
from .oracle import explore
from .pipeline import AnalysisResult, analyze_spec

REPORT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="grafcet-lint",
        description="Structural analyzer for GRAFCET control specifications.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the full analysis pipeline")
    analyze.add_argument("spec", help="path to a .grafcet.json file")
    analyze.add_argument("--format", choices=("text", "json"), default="text")
    analyze.add_argument("--dump-invariants", action="store_true",
                         help="include incidence matrices and invariant vectors")
    analyze.add_argument("--queries", metavar="FILE",
                         help="sidecar .queries.json with safety queries")
    analyze.add_argument("--naive", action="store_true",
                         help="judge never-coactive queries from value sets alone")
    analyze.add_argument("--fail-on", choices=("warning", "error"), default="warning",
                         help="lowest severity that fails the run (default: warning)")
    analyze.add_argument("--no-timings", action="store_true",
                         help="omit wall-clock timings for byte-identical reports")
    analyze.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                         help="worker threads for per-partial analyses")
    analyze.set_defaults(func=_cmd_analyze)

    oracle = sub.add_parser("oracle", help="debug: explicit-state exploration")
    oracle.add_argument("spec")
    oracle.add_argument("--mode", choices=("structural", "semantic"), default="structural")
    oracle.add_argument("--max-states", type=int, default=100_000)
    oracle.set_defaults(func=_cmd_oracle)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


def _load(path: str):
    try:
        return ingest.load_spec(path)
    except OSError as exc:
        print(f"grafcet-lint: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except ingest.SpecError as exc:
        print(f"grafcet-lint: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _cmd_analyze(args) -> int:
    spec = _load(args.spec)
    result = analyze_spec(spec, jobs=max(1, args.jobs))
    findings = list(result.findings)

    queries = _load_queries(args)
    if queries:
        try:
            findings.extend(
                checks.run_queries(spec, result.global_concurrency,
                                   result.global_reachable, result.variables,
                                   queries, naive=args.naive)
            )
        except ValueError as exc:
            print(f"grafcet-lint: {exc}", file=sys.stderr)
            return EXIT_USAGE

    report = build_report(args.spec, result, findings,
                          dump_invariants=args.dump_invariants,
                          timings=not args.no_timings)
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        _print_text(report, result, findings)

    threshold = SEVERITIES.index(args.fail_on)
    worst = max_severity(findings)
    if worst is not None and SEVERITIES.index(worst) <= threshold:
        return EXIT_FINDINGS
    return EXIT_OK


def _load_queries(args):
    data = None
    if args.queries:
        try:
            data = json.loads(Path(args.queries).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"grafcet-lint: cannot read queries {args.queries}: {exc}",
                  file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
    else:
        try:
            doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
            data = {"queries": doc.get("queries", [])}
        except (OSError, json.JSONDecodeError):
            data = None
    if not data:
        return []
    try:
        return checks.parse_queries(data.get("queries", []))
    except ValueError as exc:
        print(f"grafcet-lint: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_report(path: str, result: AnalysisResult, findings,
                 dump_invariants: bool = False, timings: bool = True) -> dict:
    spec = result.spec
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": __version__,
        "spec": {"name": spec.name, "sha256": digest},
        "partials": {},
        "variables": {name: v.to_dict() for name, v in result.variables.items()},
        "findings": [f.to_dict() for f in findings],
    }
    for c in spec.partials:
        entry = {
            "situations": [
                {
                    "source": r.situation.label,
                    "initial": sorted(r.situation.steps),
                    "reachable": sorted(r.reachable),
                    "concurrency": {s: sorted(v) for s, v in r.concurrency.items() if v},
                }
                for r in result.results[c.id]
            ],
            "reachable": sorted(result.reachable_by_partial[c.id]),
            "concurrency": {
                s: sorted(v) for s, v in result.conc_by_partial[c.id].items() if v
            },
        }
        inv = result.invariants[c.id]
        entry["boundedness"] = {
            "covered": inv.covered,
            "bound": _num(inv.bound),
            "uncovered_steps": sorted(inv.uncovered_steps),
            "per_step_bound": {s: _num(b) for s, b in inv.per_step_bound.items()},
        }
        if dump_invariants:
            from .invariants import incidence

            entry["incidence"] = incidence(c)
            entry["s_invariants"] = [
                {s: y[i] for i, s in enumerate(c.steps) if y[i]} for y in inv.s_invariants
            ]
            entry["t_invariants"] = [
                {c.transitions[j].id: x[j] for j in range(len(x)) if x[j]}
                for x in inv.t_invariants
            ]
        report["partials"][c.id] = entry
    report["execution_bounds"] = {
        f"{pid}.actions[{idx}]": {"step": b.step, "count": _num(b.count),
                                  "reasons": list(b.reasons)}
        for (pid, idx), b in sorted(result.bounds.items())
    }
    report["global_concurrency"] = {
        s: sorted(v) for s, v in sorted(result.global_concurrency.items())
    }
    if timings:
        report["timings_ms"] = {k: round(v * 1000, 3) for k, v in result.timings.items()}
    return report


def _num(value):
    if value == math.inf:
        return "inf"
    return int(value)


def _print_text(report, result, findings) -> None:
    spec = result.spec
    print(f"{spec.name}: {len(spec.partials)} partial Grafcet(s)")
    for c in spec.partials:
        entry = report["partials"][c.id]
        bound = entry["boundedness"]
        print(f"  {c.id}: {len(entry['reachable'])}/{len(c.steps)} steps reachable, "
              f"covered={bound['covered']}, bound={bound['bound']}")
    if findings:
        print(f"{len(findings)} finding(s):")
        for f in findings:
            where = ".".join(x for x in (f.partial, f.element) if x)
            print(f"  [{f.severity}] {f.kind} {where}: {f.message}")
    else:
        print("no findings")
    if "timings_ms" in report:
        total = sum(report["timings_ms"].values())
        print(f"analysis time: {total:.1f} ms")


def _cmd_oracle(args) -> int:
    spec = _load(args.spec)
    facts = explore(spec, mode=args.mode, max_states=args.max_states)
    print(json.dumps({
        "reachable": sorted(facts.reachable),
        "concurrent_pairs": sorted(sorted(p) for p in facts.pairs),
        "var_values": {k: sorted(v) for k, v in facts.var_values.items()},
        "conflicts": sorted(sorted(map(list, p)) for p in facts.conflicts),
        "inconclusive": facts.inconclusive,
    }, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
