"""Full analysis pipeline: ingest -> hierarchy -> reachability/concurrency
-> invariants -> variable approximation -> checks."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import checks, hierarchy, invariants, reachconc, varapprox
from .findings import Finding, sort_findings
from .hierarchy import HierarchyGraph, InitialSituation
from .invariants import InvariantSet
from .model import GrafcetSpec, validate
from .reachconc import ReachConcResult
from .varapprox import ExecutionBound, VarApprox

__all__ = ["AnalysisResult", "analyze_spec"]


@dataclass
class AnalysisResult:
    spec: GrafcetSpec
    hierarchy: HierarchyGraph
    situations: dict[str, list[InitialSituation]]
    results: dict[str, list[ReachConcResult]]
    reachable_by_partial: dict[str, frozenset[str]]
    conc_by_partial: dict[str, dict[str, frozenset[str]]]
    global_reachable: set[str]
    global_concurrency: dict[str, set[str]]
    invariants: dict[str, InvariantSet]
    bounds: dict[tuple[str, int], ExecutionBound]
    variables: dict[str, VarApprox]
    findings: list[Finding]
    timings: dict[str, float] = field(default_factory=dict)


def analyze_spec(spec: GrafcetSpec, jobs: int = 1,
                 invariant_cap: int = invariants.DEFAULT_CAP) -> AnalysisResult:
    findings: list[Finding] = []
    timings: dict[str, float] = {}

    def timed(name):
        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timings[name] = time.perf_counter() - self.t0

        return _Timer()

    with timed("validate"):
        findings.extend(validate(spec))

    with timed("hierarchy"):
        graph, hier_findings = hierarchy.build_hierarchy(spec)
        findings.extend(hier_findings)
        situations = {
            c.id: hierarchy.initial_situations(spec, graph, c.id) for c in spec.partials
        }
        findings.extend(hierarchy.dead_partial_findings(spec, graph))

    with timed("reachconc"):
        tasks = [
            (c, situation)
            for c in spec.partials
            for situation in situations[c.id]
        ]
        if jobs > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                computed = list(pool.map(lambda t: reachconc.analyze_partial(*t), tasks))
        else:
            computed = [reachconc.analyze_partial(c, s) for c, s in tasks]
        results: dict[str, list[ReachConcResult]] = {c.id: [] for c in spec.partials}
        for r in computed:
            results[r.partial_id].append(r)
        reachable_by_partial = {}
        conc_by_partial = {}
        for c in spec.partials:
            reachable, conc = reachconc.union_results(c, results[c.id])
            reachable_by_partial[c.id] = reachable
            conc_by_partial[c.id] = conc
        global_concurrency = reachconc.lift_concurrency(
            spec, graph, reachable_by_partial, conc_by_partial
        )
        global_reachable = {
            spec.global_step(pid, s)
            for pid, reach in reachable_by_partial.items()
            for s in reach
        }

    with timed("invariants"):
        inv_by_partial = {}
        for c in spec.partials:
            inv, inv_findings = invariants.compute_invariants(c, cap=invariant_cap)
            inv_by_partial[c.id] = inv
            findings.extend(inv_findings)

    with timed("varapprox"):
        bounds = varapprox.bound_executions(spec, inv_by_partial, results)
        variables = varapprox.approximate_variables(spec, bounds, results)

    with timed("checks"):
        findings.extend(checks.detect_races(spec, global_concurrency, global_reachable))
        findings.extend(checks.check_conditions(spec, variables, global_reachable))
        findings.extend(checks.unreachable_findings(spec, global_reachable))
        findings.extend(checks.unbounded_findings(spec, bounds))

    return AnalysisResult(
        spec=spec,
        hierarchy=graph,
        situations=situations,
        results=results,
        reachable_by_partial=reachable_by_partial,
        conc_by_partial=conc_by_partial,
        global_reachable=global_reachable,
        global_concurrency=global_concurrency,
        invariants=inv_by_partial,
        bounds=bounds,
        variables=variables,
        findings=sort_findings(findings),
        timings=timings,
    )
