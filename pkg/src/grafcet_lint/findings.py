"""Findings: the analyzer's uniform diagnostic record."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

SEVERITIES = ("error", "warning", "info")

KINDS = (
    "model-error",
    "race",
    "unsat-condition",
    "always-true-condition",
    "unreachable-step",
    "unbounded-activation",
    "hierarchy-cycle",
    "dead-partial",
    "analysis-incomplete",
    "query-violation",
)


@dataclass(frozen=True)
class Finding:
    kind: str
    severity: str
    partial: str | None
    element: str | None
    message: str
    evidence: tuple[tuple[str, object], ...] = field(default=())

    @property
    def stable_id(self) -> str:
        """Content hash of kind + location, stable across runs for CI diffs."""
        raw = f"{self.kind}:{self.partial or ''}:{self.element or ''}:{self.message}"
        return hashlib.sha256(raw.encode()).hexdigest()[:12]

    def to_dict(self) -> dict:
        return {
            "id": self.stable_id,
            "kind": self.kind,
            "severity": self.severity,
            "partial": self.partial,
            "element": self.element,
            "message": self.message,
            "evidence": {k: _jsonable(v) for k, v in self.evidence},
        }


def _jsonable(value):
    if isinstance(value, (frozenset, set)):
        return sorted(_jsonable(v) for v in value)
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def finding(kind, severity, message, partial=None, element=None, **evidence) -> Finding:
    return Finding(kind, severity, partial, element, message, tuple(sorted(evidence.items())))


def sort_findings(findings: list[Finding]) -> list[Finding]:
    """Canonical deterministic order: severity first, then location."""
    rank = {s: i for i, s in enumerate(SEVERITIES)}
    return sorted(
        findings,
        key=lambda f: (rank[f.severity], f.kind, f.partial or "", f.element or "", f.message),
    )


def max_severity(findings) -> str | None:
    present = {f.severity for f in findings}
    for severity in SEVERITIES:
        if severity in present:
            return severity
    return None
