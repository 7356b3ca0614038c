"""Incidence matrix and minimal semi-positive S-/T-invariants.

The incidence matrix of a partial Grafcet (hierarchy elements ignored) has
one row per step and one column per transition, entries in {-1, 0, +1}.
Invariants are computed with Farkas-style elimination over exact integers:
S-invariants are semi-positive vectors y with y^T N = 0, T-invariants are
semi-positive x with N x = 0, both reduced to minimal support and GCD 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from math import gcd

from .findings import Finding, finding
from .model import PartialGrafcet

__all__ = [
    "InvariantCapExceeded",
    "InvariantSet",
    "brute_force_invariants",
    "classify_boundedness",
    "compute_invariants",
    "incidence",
    "minimal_invariants",
]

DEFAULT_CAP = 10_000


class InvariantCapExceeded(Exception):
    """Raised when intermediate Farkas rows exceed the configured limit."""


def incidence(c: PartialGrafcet) -> list[list[int]]:
    """|S| x |T| incidence matrix; rows follow step declaration order."""
    index = {s: i for i, s in enumerate(c.steps)}
    matrix = [[0] * len(c.transitions) for _ in c.steps]
    for j, t in enumerate(c.transitions):
        for s in t.upstream:
            matrix[index[s]][j] -= 1
        for s in t.downstream:
            matrix[index[s]][j] += 1
    return matrix


def minimal_invariants(matrix: list[list[int]], cap: int = DEFAULT_CAP) -> list[tuple[int, ...]]:
    """Minimal-support semi-positive integer vectors y with y . rows(matrix) = 0.

    Farkas elimination: rows of [matrix | I] are combined pairwise to cancel
    each column; identity parts of surviving rows are the invariants.
    """
    nrows = len(matrix)
    if nrows == 0:
        return []
    ncols = len(matrix[0])
    rows = [tuple(matrix[i]) + tuple(1 if k == i else 0 for k in range(nrows))
            for i in range(nrows)]
    for j in range(ncols):
        positive = [r for r in rows if r[j] > 0]
        negative = [r for r in rows if r[j] < 0]
        kept = [r for r in rows if r[j] == 0]
        new_rows = kept
        for rp in positive:
            for rn in negative:
                a, b = -rn[j], rp[j]
                combined = tuple(a * x + b * y for x, y in zip(rp, rn))
                combined = _normalize(combined)
                if combined is not None:
                    new_rows.append(combined)
                if len(new_rows) > cap:
                    raise InvariantCapExceeded(
                        f"more than {cap} intermediate invariant rows"
                    )
        rows = _dedupe(new_rows)
    vectors = {v for r in rows if any(r[ncols:]) for v in (_normalize(r[ncols:]),)}
    vectors.discard(None)
    return _minimal_support(vectors)


def _normalize(vector):
    g = 0
    for v in vector:
        g = gcd(g, v)
    if g == 0:
        return None
    if g == 1:
        return tuple(vector)
    return tuple(v // g for v in vector)


def _dedupe(rows):
    seen = set()
    out = []
    for r in rows:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def _support(v):
    return frozenset(i for i, x in enumerate(v) if x)


def _minimal_support(vectors) -> list[tuple[int, ...]]:
    vectors = sorted(vectors)
    supports = [_support(v) for v in vectors]
    out = []
    for i, v in enumerate(vectors):
        if any(j != i and supports[j] < supports[i] for j in range(len(vectors))):
            continue
        out.append(v)
    # Canonical order: lexicographic by support, then by entries.
    out.sort(key=lambda v: (sorted(_support(v)), v))
    return _dedupe(out)


def brute_force_invariants(matrix: list[list[int]], max_entry: int = 6) -> list[tuple[int, ...]]:
    """Exhaustive oracle: all minimal-support solutions with entries <= max_entry."""
    nrows = len(matrix)
    if nrows == 0:
        return []
    ncols = len(matrix[0])
    solutions = []
    for v in product(range(max_entry + 1), repeat=nrows):
        if not any(v):
            continue
        if all(sum(v[i] * matrix[i][j] for i in range(nrows)) == 0 for j in range(ncols)):
            normalized = _normalize(v)
            if normalized is not None:
                solutions.append(normalized)
    return _minimal_support(set(solutions))


@dataclass(frozen=True)
class InvariantSet:
    partial_id: str
    s_invariants: tuple[tuple[int, ...], ...]  # indexed like c.steps
    t_invariants: tuple[tuple[int, ...], ...]  # indexed like c.transitions
    covered: bool
    bound: float  # smallest known activation bound; math.inf when uncovered
    uncovered_steps: frozenset[str]
    per_step_bound: dict[str, float]
    incomplete: bool = False


def compute_invariants(c: PartialGrafcet, cap: int = DEFAULT_CAP
                       ) -> tuple[InvariantSet, list[Finding]]:
    matrix = incidence(c)
    findings: list[Finding] = []
    incomplete = False
    try:
        s_invs = tuple(minimal_invariants(matrix, cap))
        if matrix and matrix[0]:
            t_matrix = [[matrix[i][j] for i in range(len(matrix))]
                        for j in range(len(matrix[0]))]
        else:
            t_matrix = []
        t_invs = tuple(minimal_invariants(t_matrix, cap))
    except InvariantCapExceeded as exc:
        s_invs, t_invs = (), ()
        incomplete = True
        findings.append(
            finding("analysis-incomplete", "warning",
                    f"invariant computation exceeded resource cap: {exc}", partial=c.id)
        )
    covered, bound, uncovered, per_step = classify_boundedness(s_invs, c)
    if incomplete:
        covered, bound, uncovered = False, math.inf, frozenset(c.steps)
        per_step = {s: math.inf for s in c.steps}
    return (
        InvariantSet(c.id, s_invs, t_invs, covered, bound, uncovered, per_step, incomplete),
        findings,
    )


def classify_boundedness(s_invariants, c: PartialGrafcet):
    """Coverage and activation bound from the minimal S-invariants.

    The partial Grafcet is covered iff every step has a positive entry in
    some S-invariant; the bound n is then the maximum entry over all minimal
    S-invariants. Per-step maxima are also reported for transparency.
    """
    per_step: dict[str, float] = {}
    for i, s in enumerate(c.steps):
        entries = [y[i] for y in s_invariants if y[i] > 0]
        per_step[s] = max(entries) if entries else math.inf
    uncovered = frozenset(s for s, b in per_step.items() if b == math.inf)
    covered = not uncovered and bool(c.steps)
    if not c.steps:
        covered = True
    if covered and s_invariants:
        bound: float = max(max(y) for y in s_invariants)
    elif covered:
        bound = 1  # no steps, vacuously bounded
    else:
        bound = math.inf
    return covered, bound, uncovered, per_step
