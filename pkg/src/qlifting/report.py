"""Scenario reports and their table / CSV / JSON renderings."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

PROB_SLACK = 1e-12
SIG_DIGITS = 12


@dataclass
class ScenarioReport:
    """Named probabilities plus the classical-law comparison ``gap = lhs - rhs``."""

    scenario: str
    parameters: dict[str, float]
    probabilities: dict[str, float]
    lhs: float | None = None
    rhs: float | None = None
    fitted: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        for name, p in self.probabilities.items():
            if not (-PROB_SLACK <= p <= 1 + PROB_SLACK):
                raise ValueError(f"probability {name}={p!r} outside [0, 1]")

    @property
    def gap(self) -> float | None:
        if self.lhs is None or self.rhs is None:
            return None
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "parameters": dict(self.parameters),
            "probabilities": dict(self.probabilities),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "fitted": dict(self.fitted),
            "warnings": list(self.warnings),
        }


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def csv_columns(reports: Sequence[ScenarioReport]) -> list[str]:
    """scenario, parameters, probabilities, fitted values, lhs, rhs, gap.

    Keys appear in first-seen order across all reports. A parameter and a
    probability may not share a name.
    """
    params: dict[str, None] = {}
    probs: dict[str, None] = {}
    fitted: dict[str, None] = {}
    for r in reports:
        params.update(dict.fromkeys(r.parameters))
        probs.update(dict.fromkeys(r.probabilities))
        fitted.update(dict.fromkeys(r.fitted))
    clash = set(params) & set(probs)
    if clash:
        raise ValueError(f"parameter and probability columns collide: {sorted(clash)}")
    return (["scenario"] + list(params) + list(probs)
            + [f"fit:{k}" for k in fitted] + ["lhs", "rhs", "gap"])


def _row(r: ScenarioReport, columns: list[str]) -> list[str]:
    out = []
    for c in columns:
        if c == "scenario":
            out.append(r.scenario)
        elif c in ("lhs", "rhs", "gap"):
            out.append(fmt(getattr(r, c)))
        elif c.startswith("fit:"):
            out.append(fmt(r.fitted.get(c[4:])))
        elif c in r.parameters:
            out.append(fmt(r.parameters[c]))
        else:
            out.append(fmt(r.probabilities.get(c)))
    return out


def to_csv(reports: Sequence[ScenarioReport]) -> str:
    cols = csv_columns(reports)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in reports:
        w.writerow(_row(r, cols))
    return buf.getvalue()


def _round_floats(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(v) for v in obj]
    return obj


def to_json(reports: Sequence[ScenarioReport]) -> str:
    data = [_round_floats(r.to_dict()) for r in reports]
    return json.dumps(data[0] if len(data) == 1 else data, indent=2) + "\n"


def to_table(reports: Sequence[ScenarioReport]) -> str:
    lines = []
    for r in reports:
        lines.append(f"== {r.scenario} ==")
        width = max([len(k) for k in (*r.parameters, *r.probabilities, *r.fitted)] + [3])
        for section, items in (("parameters", r.parameters), ("probabilities", r.probabilities),
                               ("fitted", r.fitted)):
            if not items:
                continue
            lines.append(f"  {section}:")
            lines.extend(f"    {k:<{width}}  {fmt(v)}" for k, v in items.items())
        if r.lhs is not None:
            lines.append(f"  law: lhs={fmt(r.lhs)}  rhs={fmt(r.rhs)}  gap={fmt(r.gap)}")
        lines.extend(f"  warning: {w}" for w in r.warnings)
    return "\n".join(lines) + "\n"


def emit_report(reports: ScenarioReport | Sequence[ScenarioReport], format: str = "table") -> str:
    if isinstance(reports, ScenarioReport):
        reports = [reports]
    reports = list(reports)
    if format == "csv":
        return to_csv(reports)
    if format == "json":
        return to_json(reports)
    if format == "table":
        return to_table(reports)
    raise ValueError(f"unknown format {format!r}")
