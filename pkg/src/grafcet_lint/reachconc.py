"""Worklist fixpoint for reachable steps and per-step concurrency sets.

For one partial Grafcet and one initial situation the analysis computes an
over-approximation of the reachable steps S^R and, for every step s, the
set S^C_s of steps that can be active at the same time as s. Transition
conditions are ignored (assumed satisfiable), which makes the result
independent of variable values.

Source transitions get a second pass: their downstream steps can be
activated concurrently to any already-reachable step, so the analysis is
re-run with the concurrency sets pre-seeded with the first pass's S^R.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .hierarchy import HierarchyGraph, InitialSituation
from .model import GrafcetSpec, PartialGrafcet

__all__ = [
    "ReachConcResult",
    "analyze_partial",
    "init_concurrency",
    "lift_concurrency",
    "reach_analysis",
]


@dataclass(frozen=True)
class ReachConcResult:
    partial_id: str
    situation: InitialSituation
    reachable: frozenset[str]
    concurrency: dict[str, frozenset[str]]

    def check_invariants(self) -> None:
        for s, conc in self.concurrency.items():
            assert s not in conc, f"{s} concurrent to itself"
            for s2 in conc:
                assert s in self.concurrency[s2], f"asymmetric pair ({s}, {s2})"
            if conc:
                assert s in self.reachable, f"{s} has concurrency but is unreachable"
        assert self.situation.steps <= self.reachable


def init_concurrency(c: PartialGrafcet, initial: frozenset[str]) -> dict[str, set[str]]:
    """All initially active steps are concurrent to each other."""
    return {s: set(initial - {s}) if s in initial else set() for s in c.steps}


def reach_analysis(
    c: PartialGrafcet,
    initial: frozenset[str],
    conc: dict[str, set[str]] | None = None,
    source_seed: frozenset[str] = frozenset(),
    rng: random.Random | None = None,
) -> tuple[set[str], dict[str, set[str]]]:
    """One worklist pass; returns (S^R, concurrency sets).

    ``conc`` allows pre-seeded concurrency sets (source-transition pass);
    ``source_seed`` is the set used in place of the intersection term for
    transitions with empty upstream. ``rng``, when given, randomizes the
    worklist order; the fixpoint is confluent so the result is unchanged.
    """
    if conc is None:
        conc = init_concurrency(c, initial)
    reachable: set[str] = set(initial)

    pending: set[str] = set()
    queue: deque = deque()

    def enqueue(t) -> None:
        if t.id not in pending:
            pending.add(t.id)
            queue.append(t)
            enqueues[t.id] = enqueues.get(t.id, 0) + 1

    enqueues: dict[str, int] = {}
    # Initially enabled transitions: downstream of the initial steps, plus
    # source transitions, which are enabled in any situation.
    for s in sorted(initial):
        for t in c.downstream_of[s]:
            enqueue(t)
    for t in c.source_transitions:
        enqueue(t)

    nsteps = len(c.steps)
    enqueue_bound = nsteps * (nsteps + 1) + 2

    def concurr_analysis(t, s: str) -> None:
        # Downstream steps of a parallel activation become mutually concurrent,
        # then inherit the intersection of the upstream steps' concurrency.
        target = conc[s]
        target |= t.downstream - {s}
        if t.upstream:
            shared = set.intersection(*(conc[s2] for s2 in t.upstream))
            target |= shared
        else:
            target |= source_seed
        target.discard(s)
        for s2 in target:
            conc[s2].add(s)

    while queue:
        if rng is None:
            t = queue.popleft()
        else:
            queue.rotate(-rng.randrange(len(queue)))
            t = queue.popleft()
        pending.discard(t.id)
        sizes = {s: len(conc[s]) for s in c.steps}
        if all(s2 in reachable for s2 in t.upstream):
            for s in sorted(t.downstream):
                if s not in reachable:
                    reachable.add(s)
                    for t2 in c.downstream_of[s]:
                        enqueue(t2)
                concurr_analysis(t, s)
        for s2 in c.steps:
            if len(conc[s2]) != sizes[s2]:
                for t2 in c.downstream_of[s2]:
                    enqueue(t2)
        for count in enqueues.values():
            assert count <= enqueue_bound, "worklist failed to stabilize within bound"

    return reachable, conc


def analyze_partial(
    c: PartialGrafcet,
    situation: InitialSituation,
    rng: random.Random | None = None,
) -> ReachConcResult:
    """Full analysis for one initial situation, including the source pass."""
    reachable, conc = reach_analysis(c, situation.steps, rng=rng)
    if c.source_transitions:
        first_reach = frozenset(reachable)
        seeded = init_concurrency(c, situation.steps)
        source_downstream = {
            s for t in c.source_transitions for s in t.downstream
        }
        for s in source_downstream:
            seeded[s] |= first_reach - {s}
            for s2 in first_reach - {s}:
                seeded[s2].add(s)
        reachable, conc = reach_analysis(
            c, situation.steps, conc=seeded, source_seed=first_reach, rng=rng
        )
    result = ReachConcResult(
        partial_id=c.id,
        situation=situation,
        reachable=frozenset(reachable),
        concurrency={s: frozenset(v) for s, v in conc.items()},
    )
    result.check_invariants()
    return result


def union_results(c: PartialGrafcet, results: list[ReachConcResult]
                  ) -> tuple[frozenset[str], dict[str, frozenset[str]]]:
    """Per-partial union over all initial situations."""
    reachable: set[str] = set()
    conc: dict[str, set[str]] = {s: set() for s in c.steps}
    for r in results:
        reachable |= r.reachable
        for s, v in r.concurrency.items():
            conc[s] |= v
    return frozenset(reachable), {s: frozenset(v) for s, v in conc.items()}


def lift_concurrency(
    spec: GrafcetSpec,
    graph: HierarchyGraph,
    reachable_by_partial: dict[str, frozenset[str]],
    conc_by_partial: dict[str, dict[str, frozenset[str]]],
) -> dict[str, set[str]]:
    """Global concurrency relation over "partial.step" identifiers.

    Rules, applied in topological order of the hierarchy DAG:
      (a) intra-partial pairs from each partial's (situation-union) S^C;
      (b) partial Grafcets activated by concurrent steps of a common
          superior (or by one and the same step) are concurrent as wholes;
      (c) the reachable steps of an activated partial are concurrent with
          its activating step and with everything concurrent to it.
    Partials with their own initial steps are all active from the start, so
    their reachable steps are additionally pairwise concurrent.
    """
    relation: dict[str, set[str]] = {}

    def add_pair(a: str, b: str) -> None:
        if a == b:
            return
        relation.setdefault(a, set()).add(b)
        relation.setdefault(b, set()).add(a)

    def gid(pid: str, step: str) -> str:
        return spec.global_step(pid, step)

    for pid, conc in conc_by_partial.items():
        for s, others in conc.items():
            for s2 in others:
                add_pair(gid(pid, s), gid(pid, s2))

    # Initially active root partials all run concurrently from the start.
    roots = [c.id for c in spec.partials if c.initial]
    for i, p1 in enumerate(roots):
        for p2 in roots[i + 1:]:
            for s1 in reachable_by_partial[p1]:
                for s2 in reachable_by_partial[p2]:
                    add_pair(gid(p1, s1), gid(p2, s2))

    order = graph.topological_order() if graph.is_partial_order else graph.nodes
    edges_by_source: dict[str, list] = {}
    for e in graph.edges:
        edges_by_source.setdefault(e.source, []).append(e)

    for pid in order:
        edges = edges_by_source.get(pid, [])
        # Rule (b): sibling partials activated concurrently.
        for i, e1 in enumerate(edges):
            g1 = gid(pid, e1.step)
            for e2 in edges[i + 1:]:
                if e1.target == e2.target:
                    continue
                g2 = gid(pid, e2.step)
                if e1.step == e2.step or g2 in relation.get(g1, ()):
                    for s1 in reachable_by_partial[e1.target]:
                        for s2 in reachable_by_partial[e2.target]:
                            add_pair(gid(e1.target, s1), gid(e2.target, s2))
        # Rule (c): activated steps are concurrent with the activating step
        # and with everything concurrent to it.
        for e in edges:
            anchor = gid(pid, e.step)
            neighbors = set(relation.get(anchor, ()))
            for s in reachable_by_partial[e.target]:
                g = gid(e.target, s)
                add_pair(g, anchor)
                for n in neighbors:
                    add_pair(g, n)
    return relation
