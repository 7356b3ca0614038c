"""Hierarchical dependencies between partial Grafcets.

Enclosing steps and forcing orders induce directed edges between partial
Grafcets. These dependencies must form a partial order; each incoming edge
(and the partial's own initial steps) yields one initial situation.
"""

from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Union

from .findings import Finding, finding
from .model import GrafcetSpec

__all__ = ["HierarchyEdge", "HierarchyGraph", "InitialSituation", "build_hierarchy",
           "initial_situations"]


@dataclass(frozen=True)
class HierarchyEdge:
    source: str  # partial holding the enclosing step / forcing order
    target: str
    kind: str  # "enclosing" | "forcing"
    step: str
    situation: Union[frozenset[str], str, None] = None  # forcing only


@dataclass(frozen=True)
class HierarchyGraph:
    nodes: tuple[str, ...]
    edges: tuple[HierarchyEdge, ...]
    cycle: tuple[str, ...] | None = None  # populated when not a partial order

    @property
    def is_partial_order(self) -> bool:
        return self.cycle is None

    def incoming(self, partial_id: str) -> tuple[HierarchyEdge, ...]:
        return tuple(e for e in self.edges if e.target == partial_id)

    def topological_order(self) -> tuple[str, ...]:
        sorter = TopologicalSorter({n: set() for n in self.nodes})
        for e in self.edges:
            sorter.add(e.target, e.source)
        return tuple(sorter.static_order())


@dataclass(frozen=True)
class InitialSituation:
    partial_id: str
    source: str  # "initial-steps" | "enclosing" | "forcing"
    from_step: str | None  # step in the superior partial, None for initial-steps
    from_partial: str | None
    steps: frozenset[str]

    @property
    def label(self) -> str:
        if self.source == "initial-steps":
            return "initial-steps"
        return f"{self.source}:{self.from_partial}.{self.from_step}"


def build_hierarchy(spec: GrafcetSpec) -> tuple[HierarchyGraph, list[Finding]]:
    edges: list[HierarchyEdge] = []
    for c in spec.partials:
        for step, target in c.enclosings:
            edges.append(HierarchyEdge(c.id, target, "enclosing", step))
        for a in c.forcings:
            edges.append(HierarchyEdge(c.id, a.target, "forcing", a.step, a.situation))
    graph = HierarchyGraph(tuple(c.id for c in spec.partials), tuple(edges))

    findings: list[Finding] = []
    try:
        graph.topological_order()
    except CycleError as exc:
        cycle = tuple(exc.args[1])
        graph = HierarchyGraph(graph.nodes, graph.edges, cycle=cycle)
        findings.append(
            finding(
                "hierarchy-cycle", "error",
                "hierarchical dependencies are not a partial order: "
                + " -> ".join(cycle),
                cycle=cycle,
            )
        )
    return graph, findings


def initial_situations(spec: GrafcetSpec, graph: HierarchyGraph,
                       partial_id: str) -> list[InitialSituation]:
    """All entry modes of a partial Grafcet, one situation per source.

    Initial steps contribute I_c; each incoming enclosing edge contributes
    M_c; a forcing with an explicit step set contributes that set; a forcing
    to "init" contributes I_c; a freezing forcing ("*") adds no entry point.
    """
    c = spec.partial_map[partial_id]
    out: list[InitialSituation] = []
    if c.initial:
        out.append(InitialSituation(partial_id, "initial-steps", None, None, c.initial))
    for edge in graph.incoming(partial_id):
        if edge.kind == "enclosing":
            out.append(InitialSituation(partial_id, "enclosing", edge.step, edge.source,
                                        c.marked))
        elif edge.situation == "*":
            continue
        elif edge.situation == "init":
            out.append(InitialSituation(partial_id, "forcing", edge.step, edge.source,
                                        c.initial))
        else:
            assert isinstance(edge.situation, frozenset)
            out.append(InitialSituation(partial_id, "forcing", edge.step, edge.source,
                                        edge.situation))
    return out


def dead_partial_findings(spec: GrafcetSpec, graph: HierarchyGraph) -> list[Finding]:
    """A partial Grafcet with no initial situation at all is dead code."""
    out = []
    for c in spec.partials:
        if not initial_situations(spec, graph, c.id):
            out.append(
                finding("dead-partial", "warning",
                        f"partial Grafcet {c.id!r} has no initial situation and can "
                        "never become active", partial=c.id)
            )
    return out
