"""In-memory domain model for a complete GRAFCET specification.

A specification is a set of partial Grafcets plus global variable
declarations. Each partial Grafcet owns steps, transitions, actions and
its hierarchy anchors (enclosing steps, forcing orders). Step identifiers
are namespaced by partial Grafcet; a global step is written "partial.step".
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

from .conditions import (
    Arith,
    CondTypeError,
    Condition,
    typecheck,
    variables_read,
)
from .findings import Finding, finding, sort_findings

__all__ = [
    "ContinuousAction",
    "ForcingAction",
    "GrafcetSpec",
    "PartialGrafcet",
    "StoredAction",
    "Transition",
    "VariableDecl",
    "validate",
]


@dataclass(frozen=True)
class VariableDecl:
    name: str
    kind: str  # input | internal | output
    type: str  # bool | int
    init: int | None = None  # None for inputs (unconstrained)

    @property
    def init_value(self) -> int:
        return 0 if self.init is None else self.init


@dataclass(frozen=True)
class Transition:
    id: str
    upstream: frozenset[str]
    downstream: frozenset[str]
    condition: Condition | None = None  # None means constant true

    @property
    def is_source(self) -> bool:
        return not self.upstream

    @property
    def is_sink(self) -> bool:
        return not self.downstream


@dataclass(frozen=True)
class ContinuousAction:
    step: str
    var: str  # Boolean output, level-assigned while the step is active
    condition: Condition | None = None


@dataclass(frozen=True)
class StoredAction:
    step: str
    var: str  # internal or output variable
    value: Union[Arith, bool]  # Arith for int variables, literal for bools
    trigger: str = "activation"  # activation | deactivation | during
    condition: Condition | None = None


@dataclass(frozen=True)
class ForcingAction:
    step: str
    target: str  # partial Grafcet forced by this order
    situation: Union[frozenset[str], str]  # explicit step set, "*" or "init"


Action = Union[ContinuousAction, StoredAction, ForcingAction]

TRIGGERS = ("activation", "deactivation", "during")


@dataclass(frozen=True)
class PartialGrafcet:
    id: str
    steps: tuple[str, ...]  # declaration order fixes invariant-vector indexing
    initial: frozenset[str]
    marked: frozenset[str]
    enclosings: tuple[tuple[str, str], ...]  # (step, target partial)
    transitions: tuple[Transition, ...]
    actions: tuple[Action, ...]

    @property
    def is_enclosed(self) -> bool:
        return bool(self.marked)

    @cached_property
    def step_set(self) -> frozenset[str]:
        return frozenset(self.steps)

    @cached_property
    def downstream_of(self) -> dict[str, tuple[Transition, ...]]:
        """s -> transitions with s in their upstream (the set s-dot)."""
        table: dict[str, list[Transition]] = {s: [] for s in self.steps}
        for t in self.transitions:
            for s in t.upstream:
                if s in table:
                    table[s].append(t)
        return {s: tuple(ts) for s, ts in table.items()}

    @cached_property
    def upstream_of(self) -> dict[str, tuple[Transition, ...]]:
        """s -> transitions with s in their downstream (the set dot-s)."""
        table: dict[str, list[Transition]] = {s: [] for s in self.steps}
        for t in self.transitions:
            for s in t.downstream:
                if s in table:
                    table[s].append(t)
        return {s: tuple(ts) for s, ts in table.items()}

    @cached_property
    def source_transitions(self) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.is_source)

    @cached_property
    def forcings(self) -> tuple[ForcingAction, ...]:
        return tuple(a for a in self.actions if isinstance(a, ForcingAction))


@dataclass(frozen=True)
class GrafcetSpec:
    name: str
    inputs: tuple[VariableDecl, ...]
    internals: tuple[VariableDecl, ...]
    outputs: tuple[VariableDecl, ...]
    partials: tuple[PartialGrafcet, ...]

    @cached_property
    def variables(self) -> dict[str, VariableDecl]:
        table = {}
        for decl in self.inputs + self.internals + self.outputs:
            table[decl.name] = decl
        return table

    @cached_property
    def var_types(self) -> dict[str, str]:
        return {name: decl.type for name, decl in self.variables.items()}

    @cached_property
    def partial_map(self) -> dict[str, PartialGrafcet]:
        return {c.id: c for c in self.partials}

    @cached_property
    def step_refs(self) -> set[tuple[str, str]]:
        return {(c.id, s) for c in self.partials for s in c.steps}

    def global_step(self, partial_id: str, step: str) -> str:
        return f"{partial_id}.{step}"


def validate(spec: GrafcetSpec) -> list[Finding]:
    """Check every model invariant; returns error findings, empty iff well-formed."""
    out: list[Finding] = []

    def err(message, partial=None, element=None, **evidence):
        out.append(finding("model-error", "error", message, partial, element, **evidence))

    _check_variables(spec, err)
    _check_partials(spec, err)
    _check_actions(spec, err)
    _check_conditions(spec, err)
    return sort_findings(out)


def _check_variables(spec, err):
    seen: set[str] = set()
    for decl in spec.inputs + spec.internals + spec.outputs:
        if decl.name in seen:
            err(f"duplicate variable name {decl.name!r}")
        seen.add(decl.name)
        if decl.kind == "input":
            if decl.init is not None:
                err(f"input variable {decl.name!r} must not declare an init value")
        else:
            if decl.type == "bool" and decl.init_value not in (0, 1):
                err(f"bool variable {decl.name!r} has init {decl.init} outside {{0, 1}}")


def _check_partials(spec, err):
    seen: set[str] = set()
    for c in spec.partials:
        if c.id in seen:
            err(f"duplicate partial Grafcet id {c.id!r}")
        seen.add(c.id)
        steps = c.step_set
        if len(c.steps) != len(steps):
            err("duplicate step ids", partial=c.id)
        for s in c.initial - steps:
            err(f"initial step {s!r} is not a step", partial=c.id)
        for s in c.marked - steps:
            err(f"marked step {s!r} is not a step", partial=c.id)
        for step, target in c.enclosings:
            if step not in steps:
                err(f"enclosing step {step!r} is not a step", partial=c.id, element=step)
            if target == c.id:
                err("a partial Grafcet cannot enclose itself", partial=c.id, element=step)
            elif target not in spec.partial_map:
                err(f"enclosing target {target!r} is not a partial Grafcet",
                    partial=c.id, element=step)
        seen_t: set[str] = set()
        for t in c.transitions:
            if t.id in seen_t:
                err(f"duplicate transition id {t.id!r}", partial=c.id)
            seen_t.add(t.id)
            if not t.upstream and not t.downstream:
                err("empty transition: upstream and downstream are both empty",
                    partial=c.id, element=t.id)
            for s in (t.upstream | t.downstream) - steps:
                err(f"transition references unknown step {s!r}", partial=c.id, element=t.id)


def _check_actions(spec, err):
    continuous_written: set[str] = set()
    stored_written: set[str] = set()
    for c in spec.partials:
        for i, a in enumerate(c.actions):
            element = f"actions[{i}]"
            if a.step not in c.step_set:
                err(f"action attached to unknown step {a.step!r}", partial=c.id, element=element)
            if isinstance(a, ContinuousAction):
                decl = spec.variables.get(a.var)
                if decl is None:
                    err(f"continuous action writes undeclared variable {a.var!r}",
                        partial=c.id, element=element)
                elif decl.kind != "output" or decl.type != "bool":
                    err(f"continuous action target {a.var!r} must be a Boolean output",
                        partial=c.id, element=element)
                continuous_written.add(a.var)
            elif isinstance(a, StoredAction):
                decl = spec.variables.get(a.var)
                if decl is None:
                    err(f"stored action writes undeclared variable {a.var!r}",
                        partial=c.id, element=element)
                else:
                    if decl.kind not in ("internal", "output"):
                        err(f"stored action target {a.var!r} must be internal or output",
                            partial=c.id, element=element)
                    if decl.type == "bool" and not isinstance(a.value, bool):
                        err(f"stored value for Boolean {a.var!r} must be a literal",
                            partial=c.id, element=element)
                    if decl.type == "int" and not isinstance(a.value, Arith):
                        err(f"stored value for integer {a.var!r} must be an integer expression",
                            partial=c.id, element=element)
                if a.trigger not in TRIGGERS:
                    err(f"unknown trigger {a.trigger!r}", partial=c.id, element=element)
                stored_written.add(a.var)
            else:
                target = spec.partial_map.get(a.target)
                if target is None:
                    err(f"forcing targets unknown partial Grafcet {a.target!r}",
                        partial=c.id, element=element)
                elif a.target == c.id:
                    err("a partial Grafcet cannot force itself", partial=c.id, element=element)
                elif isinstance(a.situation, frozenset):
                    for s in a.situation - target.step_set:
                        err(f"forced situation contains unknown step {s!r} of {a.target!r}",
                            partial=c.id, element=element)
                elif a.situation not in ("*", "init"):
                    err(f"invalid forced situation {a.situation!r}", partial=c.id, element=element)
    for v in sorted(continuous_written & stored_written):
        err(f"output {v!r} is written by both continuous and stored actions", element=v)


def _check_conditions(spec, err):
    types = spec.var_types
    steps = spec.step_refs
    for c in spec.partials:
        for t in c.transitions:
            if t.condition is not None:
                _check_cond(spec, t.condition, types, steps, err, c.id, t.id)
        for i, a in enumerate(c.actions):
            element = f"actions[{i}]"
            cond = getattr(a, "condition", None)
            if cond is not None:
                _check_cond(spec, cond, types, steps, err, c.id, element)
            if isinstance(a, StoredAction) and isinstance(a.value, Arith):
                for term in a.value.terms:
                    if term.var is None:
                        continue
                    if term.var not in types:
                        err(f"stored value reads undeclared variable {term.var!r}",
                            partial=c.id, element=element)
                    elif types[term.var] != "int":
                        err(f"Boolean variable {term.var!r} used in arithmetic",
                            partial=c.id, element=element)


def _check_cond(spec, cond, types, steps, err, partial, element):
    names, refs = variables_read(cond)
    for name in sorted(names):
        if name not in types:
            err(f"condition reads undeclared variable {name!r}", partial=partial, element=element)
            return
    for ref in refs:
        if (ref.partial, ref.step) not in steps:
            err(f"condition reads unknown step variable {ref.text!r}",
                partial=partial, element=element)
            return
    try:
        typecheck(cond, types, steps)
    except CondTypeError as exc:
        err(str(exc), partial=partial, element=element)
