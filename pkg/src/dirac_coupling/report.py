"""Structured verdicts shared by every check."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import sympy

from .expr import DEFAULT_SAMPLES, SampleConfig, ZeroVerdict, classify_zero

PASS, UNKNOWN, FAIL, INVALID = "pass", "unknown", "fail", "invalid"
_SEVERITY = {PASS: 0, UNKNOWN: 1, FAIL: 2, INVALID: 3}
EXIT_CODES = {PASS: 0, FAIL: 1, UNKNOWN: 2, INVALID: 3}


def worst(statuses: Iterable[str]) -> str:
    return max(statuses, key=_SEVERITY.__getitem__, default=PASS)


def render_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, sympy.Basic):
        return sympy.sstr(v)
    return str(v)


def render_point(p: Mapping | None) -> dict[str, str] | None:
    if p is None:
        return None
    return {k: render_value(v) for k, v in sorted(p.items())}


@dataclass
class Witness:
    point: dict | None
    values: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "point": render_point(self.point),
            "values": {k: render_value(v) for k, v in sorted(self.values.items())},
        }


@dataclass
class CheckRecord:
    check_id: str
    anchor: str
    status: str
    witnesses: list[Witness] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self):
        return {
            "id": self.check_id,
            "anchor": self.anchor,
            "status": self.status,
            "witnesses": [w.to_json() for w in self.witnesses],
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    return render_value(obj)


@dataclass
class VerificationReport:
    checks: list[CheckRecord] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return worst(c.status for c in self.checks)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def add(self, record: CheckRecord) -> CheckRecord:
        self.checks.append(record)
        return record

    def extend(self, other: "VerificationReport", prefix: str = "") -> "VerificationReport":
        for c in other.checks:
            if prefix:
                c = CheckRecord(prefix + c.check_id, c.anchor, c.status, c.witnesses, c.details)
            self.checks.append(c)
        self.data.update(other.data)
        return self

    def __getitem__(self, check_id: str) -> CheckRecord:
        for c in self.checks:
            if c.check_id == check_id:
                return c
        raise KeyError(check_id)

    def __contains__(self, check_id: str) -> bool:
        return any(c.check_id == check_id for c in self.checks)

    def statuses(self) -> dict[str, str]:
        return {c.check_id: c.status for c in self.checks}

    def to_json(self):
        return {
            "status": self.status,
            "checks": [c.to_json() for c in self.checks],
            "data": _jsonable(self.data),
        }

    def render_text(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(f"[{c.status.upper():7}] {c.check_id} ({c.anchor})")
            for w in c.witnesses[:3]:
                j = w.to_json()
                lines.append(f"          at {j['point']}: {j['values']}")
        lines.append(f"overall: {self.status}")
        return "\n".join(lines)


def zero_check(
    check_id: str,
    anchor: str,
    exprs: Mapping[str, object],
    cfg: SampleConfig = DEFAULT_SAMPLES,
    details: dict | None = None,
) -> CheckRecord:
    """One record asserting that every labelled expression vanishes identically."""
    status = PASS
    witnesses = []
    sampled = False
    for label, e in exprs.items():
        v = classify_zero(e, cfg)
        if v.kind == ZeroVerdict.NONZERO:
            status = worst([status, FAIL])
            witnesses.append(Witness(v.witness, {label: v.value, f"{label}:expr": e}))
        elif v.kind == ZeroVerdict.UNKNOWN:
            status = worst([status, UNKNOWN])
        elif v.kind == ZeroVerdict.SAMPLED_ZERO:
            sampled = True
    d = dict(details or {})
    d["conditions"] = len(exprs)
    if sampled:
        d["sampled"] = True
    return CheckRecord(check_id, anchor, status, witnesses, d)
