"""Turn analysis results into findings: races, condition satisfiability,
unreachable steps, unbounded activations and user-declared safety queries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .conditions import BOTH, ONLY_FALSE, ONLY_TRUE, StepRef, TOP_INT, VarRef, abstract_eval, to_text, variables_read
from .findings import Finding, finding, sort_findings
from .model import ContinuousAction, GrafcetSpec, StoredAction
from .varapprox import ExecutionBound, VarApprox

__all__ = [
    "SafetyQuery",
    "check_conditions",
    "detect_races",
    "parse_queries",
    "run_queries",
    "unbounded_findings",
    "unreachable_findings",
]


def detect_races(
    spec: GrafcetSpec,
    global_conc: dict[str, set[str]],
    reachable: set[str],
) -> list[Finding]:
    """Stored writes of one variable from (potentially) concurrent steps.

    Two distinct stored actions on the same step also race: their execution
    order within one activation is non-deterministic.
    """
    out: list[Finding] = []
    stored: dict[str, list] = {}
    cont: dict[str, list] = {}
    for c in spec.partials:
        for i, a in enumerate(c.actions):
            if isinstance(a, StoredAction):
                stored.setdefault(a.var, []).append((c.id, i, a))
            elif isinstance(a, ContinuousAction):
                cont.setdefault(a.var, []).append((c.id, i, a))

    for var in sorted(stored):
        actions = stored[var]
        for i, (p1, i1, a1) in enumerate(actions):
            g1 = spec.global_step(p1, a1.step)
            for p2, i2, a2 in actions[i + 1:]:
                g2 = spec.global_step(p2, a2.step)
                if g1 not in reachable or g2 not in reachable:
                    continue
                if g1 == g2 or g2 in global_conc.get(g1, ()):
                    out.append(
                        finding(
                            "race", "error",
                            f"stored actions at {g1} and {g2} both write {var!r} "
                            "from concurrent steps",
                            partial=p1, element=f"actions[{i1}]",
                            variable=var,
                            actions=((p1, i1), (p2, i2)),
                            steps=(g1, g2),
                        )
                    )

    # A continuous writer whose output is read by a concurrent stored
    # action's value expression is order-sensitive too; informational only.
    for var in sorted(cont):
        for p1, i1, a1 in cont[var]:
            g1 = spec.global_step(p1, a1.step)
            for c in spec.partials:
                for i2, a2 in enumerate(c.actions):
                    if not isinstance(a2, StoredAction) or isinstance(a2.value, bool):
                        continue
                    if not any(t.var == var for t in a2.value.terms):
                        continue
                    g2 = spec.global_step(c.id, a2.step)
                    if g2 in global_conc.get(g1, ()):
                        out.append(
                            finding(
                                "race", "info",
                                f"continuous write of {var!r} at {g1} is read by a "
                                f"concurrent stored action at {g2}",
                                partial=p1, element=f"actions[{i1}]",
                                variable=var, steps=(g1, g2),
                            )
                        )
    return sort_findings(out)


def _abstract_env(spec, var_approx, reachable):
    inputs = {d.name: d for d in spec.inputs}

    def env(ref: Union[VarRef, StepRef]):
        if isinstance(ref, StepRef):
            gid = spec.global_step(ref.partial, ref.step)
            return BOTH if gid in reachable else ONLY_FALSE
        decl = inputs.get(ref.name)
        if decl is not None:
            return BOTH if decl.type == "bool" else TOP_INT
        approx = var_approx[ref.name]
        if approx.type == "bool":
            return approx.values
        return approx.interval

    return env


def check_conditions(
    spec: GrafcetSpec,
    var_approx: dict[str, VarApprox],
    reachable: set[str],
) -> list[Finding]:
    """Three-valued satisfiability of every transition and action condition."""
    env = _abstract_env(spec, var_approx, reachable)
    out: list[Finding] = []

    def check(cond, partial, element):
        if cond is None:
            return
        result = abstract_eval(cond, env)
        if result == ONLY_FALSE:
            out.append(
                finding("unsat-condition", "error",
                        f"condition {to_text(cond)!r} can never be true",
                        partial=partial, element=element, condition=to_text(cond))
            )
        elif result == ONLY_TRUE:
            names, refs = variables_read(cond)
            if not names and not refs:
                out.append(
                    finding("always-true-condition", "info",
                            f"condition {to_text(cond)!r} is constantly true",
                            partial=partial, element=element, condition=to_text(cond))
                )

    for c in spec.partials:
        for t in c.transitions:
            check(t.condition, c.id, t.id)
        for i, a in enumerate(c.actions):
            check(getattr(a, "condition", None), c.id, f"actions[{i}]")
    return sort_findings(out)


def unreachable_findings(spec: GrafcetSpec, reachable: set[str]) -> list[Finding]:
    out = []
    for c in spec.partials:
        for s in c.steps:
            if spec.global_step(c.id, s) not in reachable:
                out.append(
                    finding("unreachable-step", "warning",
                            f"step {s!r} is unreachable in every initial situation",
                            partial=c.id, element=s)
                )
    return sort_findings(out)


def unbounded_findings(spec: GrafcetSpec,
                       bounds: dict[tuple[str, int], ExecutionBound]) -> list[Finding]:
    out = []
    for (pid, idx), bound in sorted(bounds.items()):
        if bound.count == math.inf:
            out.append(
                finding("unbounded-activation", "warning",
                        f"action at step {bound.step!r} may execute unboundedly often "
                        f"({', '.join(bound.reasons)})",
                        partial=pid, element=f"actions[{idx}]",
                        reasons=bound.reasons)
            )
    return sort_findings(out)


# --- safety queries --------------------------------------------------------

@dataclass(frozen=True)
class SafetyQuery:
    name: str
    kind: str  # "never-concurrent" | "never-coactive"
    steps: tuple[str, str] | None = None  # global step ids
    terms: tuple[tuple[str, bool], ...] | None = None  # ((var, literal), (var, literal))


def parse_queries(data: list[dict]) -> list[SafetyQuery]:
    out = []
    for i, q in enumerate(data):
        kind = q.get("kind")
        name = q.get("name", f"query-{i}")
        if kind == "never-concurrent":
            steps = q.get("steps")
            if not isinstance(steps, list) or len(steps) != 2:
                raise ValueError(f"query {name!r}: 'steps' must list two global step ids")
            out.append(SafetyQuery(name, kind, steps=(steps[0], steps[1])))
        elif kind == "never-coactive":
            terms = []
            for side in ("a", "b"):
                term = q.get(side)
                if not isinstance(term, dict) or "var" not in term:
                    raise ValueError(f"query {name!r}: missing term {side!r}")
                terms.append((term["var"], bool(term.get("value", True))))
            out.append(SafetyQuery(name, kind, terms=tuple(terms)))
        else:
            raise ValueError(f"query {name!r}: unknown kind {kind!r}")
    return out


def run_queries(
    spec: GrafcetSpec,
    global_conc: dict[str, set[str]],
    reachable: set[str],
    var_approx: dict[str, VarApprox],
    queries: list[SafetyQuery],
    naive: bool = False,
) -> list[Finding]:
    """Evaluate safety queries.

    never-coactive is judged from the concurrency of the writing steps; the
    ``naive`` flag switches to value sets alone, which cannot distinguish
    sequential from simultaneous values and is prone to false alarms.
    """
    out = []
    for q in queries:
        if q.kind == "never-concurrent":
            a, b = q.steps
            for g in (a, b):
                if "." not in g or g not in {
                    spec.global_step(c.id, s) for c in spec.partials for s in c.steps
                }:
                    raise ValueError(f"query {q.name!r}: unknown step {g!r}")
            if b in global_conc.get(a, ()):
                out.append(
                    finding("query-violation", "error",
                            f"query {q.name!r}: steps {a} and {b} can be concurrent",
                            element=q.name, steps=(a, b))
                )
        else:
            violated, evidence = _coactive(spec, global_conc, reachable, var_approx, q, naive)
            if violated:
                out.append(
                    finding("query-violation", "error",
                            f"query {q.name!r}: " + evidence, element=q.name)
                )
    return sort_findings(out)


def _coactive(spec, global_conc, reachable, var_approx, q: SafetyQuery, naive: bool):
    (var_a, lit_a), (var_b, lit_b) = q.terms
    for var in (var_a, var_b):
        if var not in spec.variables:
            raise ValueError(f"query {q.name!r}: unknown variable {var!r}")
    if naive:
        ok_a = lit_a in _value_set(var_approx, var_a)
        ok_b = lit_b in _value_set(var_approx, var_b)
        if ok_a and ok_b:
            return True, (f"{var_a}={str(lit_a).lower()} and {var_b}={str(lit_b).lower()} "
                          "are both possible values (value-set approximation)")
        return False, ""
    steps_a = _steps_making(spec, reachable, var_a, lit_a)
    steps_b = _steps_making(spec, reachable, var_b, lit_b)
    for ga in steps_a:
        for gb in steps_b:
            if ga == gb or gb in global_conc.get(ga, ()):
                return True, (f"{var_a}={str(lit_a).lower()} (step {ga}) and "
                              f"{var_b}={str(lit_b).lower()} (step {gb}) can hold "
                              "simultaneously")
    return False, ""


def _value_set(var_approx, var):
    approx = var_approx.get(var)
    if approx is None or approx.type != "bool":
        raise ValueError(f"never-coactive requires Boolean variables, got {var!r}")
    return approx.values


def _steps_making(spec, reachable, var, literal) -> set[str]:
    """Reachable steps whose actions can give ``var`` the value ``literal``."""
    steps = set()
    for c in spec.partials:
        for a in c.actions:
            gid = spec.global_step(c.id, a.step)
            if gid not in reachable:
                continue
            if isinstance(a, ContinuousAction) and a.var == var and literal:
                steps.add(gid)
            elif isinstance(a, StoredAction) and a.var == var and \
                    isinstance(a.value, bool) and a.value == literal:
                steps.add(gid)
    return steps
