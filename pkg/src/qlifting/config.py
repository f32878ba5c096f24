"""Scenario configuration files (JSON) and the runner that turns them into reports.

A config looks like::

    {
      "kind": "lactose",
      "params": {"p_plus_L": 0.9733, "p_plus_G": 0.011, "p_L": 0.8, "ratio": 0.00778},
      "sweep": {"param": "ratio", "start": 1e-3, "stop": 1, "steps": 50, "scale": "log"},
      "output": {"format": "csv", "path": "out.csv"}
    }

Complex numbers are written as ``[re, im]`` pairs.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import case_studies as cs
from .adaptive import AdaptiveScenario, joint_like_table
from .channels import KrausChannel
from .liftings import compound_lifting, isometric_lifting, product_lifting
from .operators import DensityState, EventSystem, expectation
from .report import ScenarioReport

KINDS = ("tongue", "lactose", "bayes", "custom-lifting")
FORMATS = ("table", "csv", "json")


class ConfigError(ValueError):
    """Itemized configuration problems; each item is ``(message, line or None)``."""

    def __init__(self, issues: list[tuple[str, int | None]]):
        self.issues = issues
        super().__init__("; ".join(m if ln is None else f"line {ln}: {m}" for m, ln in issues))


@dataclass
class SweepSpec:
    param: str
    start: float
    stop: float
    steps: int
    scale: str = "linear"

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.steps)
        return np.linspace(self.start, self.stop, self.steps)

    def to_dict(self) -> dict:
        return {"param": self.param, "start": self.start, "stop": self.stop,
                "steps": self.steps, "scale": self.scale}


@dataclass
class ScenarioConfig:
    kind: str
    params: dict
    sweep: SweepSpec | None = None
    output: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "params": self.params}
        if self.sweep is not None:
            d["sweep"] = self.sweep.to_dict()
        if self.output:
            d["output"] = dict(self.output)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @property
    def format(self) -> str:
        return self.output.get("format", "table")


# --- parsing ---------------------------------------------------------------------

# (required one-of groups, optional names) per kind
_REQUIRED = {
    "tongue": [("lambda1", "lambda1_sq"), ("mu1", "mu1_sq")],
    "lactose": [("p_plus_L",), ("p_plus_G",), ("p_L", "alpha")],
    "bayes": [("p_A",), ("p_C_given_A",), ("p_C_given_B",)],
    "custom-lifting": [("state",), ("lifting",), ("system_a",), ("system_b",)],
}
_COMPLEX = {"lambda1", "lambda2", "mu1", "mu2", "alpha", "beta", "k_L", "k_G"}
_REAL = {"lambda1_sq", "lambda2_sq", "mu1_sq", "mu2_sq", "p_plus_L", "p_plus_G", "p_L", "ratio",
         "target", "phase_minus_L", "phase_minus_G", "p_A", "p_C_given_A", "p_C_given_B",
         "bias_strength", "bias_angle"}
_STRING = {"observed": ("C", "D"), "bias_family": tuple(cs.BIAS_FAMILIES)}
_FLAGS = {"unread"}


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_complex(v) -> bool:
    return _is_number(v) or (isinstance(v, list) and len(v) == 2 and all(_is_number(x) for x in v))


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario config, collecting every problem found."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([(f"malformed JSON: {exc.msg}", exc.lineno)]) from None
    if not isinstance(data, dict):
        raise ConfigError([("config must be a JSON object", 1)])
    issues: list[tuple[str, int | None]] = []
    kind = data.get("kind")
    if kind not in KINDS:
        issues.append((f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", _line_of(text, "kind")))
    params = data.get("params", {})
    if not isinstance(params, dict):
        issues.append(("'params' must be an object", _line_of(text, "params")))
        params = {}
    if kind in _REQUIRED:
        for group in _REQUIRED[kind]:
            if not any(name in params for name in group):
                issues.append((f"missing parameter {' or '.join(group)!s} for kind {kind}",
                               _line_of(text, "params")))
    for name, value in params.items():
        ln = _line_of(text, name)
        if name in _COMPLEX and not _is_complex(value):
            issues.append((f"parameter {name}: malformed number {value!r} (number or [re, im])", ln))
        elif name in _REAL and not _is_number(value):
            issues.append((f"parameter {name}: malformed number {value!r}", ln))
        elif name in _STRING and value not in _STRING[name]:
            issues.append((f"parameter {name}: expected one of {_STRING[name]}, got {value!r}", ln))
        elif name in _FLAGS and not isinstance(value, bool):
            issues.append((f"parameter {name}: expected true/false", ln))
    sweep = None
    if "sweep" in data:
        sweep, sweep_issues = _parse_sweep(data["sweep"], params, text)
        issues.extend(sweep_issues)
    output = data.get("output", {})
    if not isinstance(output, dict):
        issues.append(("'output' must be an object", _line_of(text, "output")))
        output = {}
    elif output.get("format", "table") not in FORMATS:
        issues.append((f"output format must be one of {FORMATS}", _line_of(text, "format")))
    unknown = set(data) - {"kind", "params", "sweep", "output"}
    for key in sorted(unknown):
        issues.append((f"unknown top-level key {key!r}", _line_of(text, key)))
    if issues:
        raise ConfigError(issues)
    return ScenarioConfig(kind, params, sweep, output)


def _parse_sweep(raw, params: dict, text: str):
    ln = _line_of(text, "sweep")
    if not isinstance(raw, dict):
        return None, [("'sweep' must be an object", ln)]
    issues = []
    name = raw.get("param")
    if not isinstance(name, str) or name not in _REAL:
        issues.append((f"sweep param must name a real parameter, got {name!r}", ln))
    for key in ("start", "stop"):
        if not _is_number(raw.get(key)):
            issues.append((f"sweep {key}: malformed number {raw.get(key)!r}", ln))
    steps = raw.get("steps")
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        issues.append(("sweep steps must be a positive integer", ln))
    scale = raw.get("scale", "linear")
    if scale not in ("linear", "log"):
        issues.append((f"sweep scale must be 'linear' or 'log', got {scale!r}", ln))
    elif scale == "log" and not issues and (raw["start"] <= 0 or raw["stop"] <= 0):
        issues.append(("log sweep needs a positive range", ln))
    if issues:
        return None, issues
    return SweepSpec(name, float(raw["start"]), float(raw["stop"]), steps, scale), []


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# --- building scenarios -------------------------------------------------------------


def to_complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def _amplitude(params: dict, name: str, partner_sq: float | None = None) -> complex:
    if name in params:
        return to_complex(params[name])
    if f"{name}_sq" in params:
        return complex(math.sqrt(params[f"{name}_sq"]))
    return complex(math.sqrt(max(0.0, 1.0 - partner_sq)))


def tongue_params(params: dict) -> cs.TongueParams:
    l1 = _amplitude(params, "lambda1")
    m1 = _amplitude(params, "mu1")
    l2 = _amplitude(params, "lambda2", abs(l1) ** 2)
    m2 = _amplitude(params, "mu2", abs(m1) ** 2)
    return cs.TongueParams(l1, l2, m1, m2)


def lactose_params(params: dict, ratio: float | None = None) -> cs.LactoseParams:
    if "alpha" in params:
        alpha = to_complex(params["alpha"])
        beta = to_complex(params["beta"]) if "beta" in params else complex(math.sqrt(1 - abs(alpha) ** 2))
    else:
        alpha, beta = math.sqrt(params["p_L"]), math.sqrt(1 - params["p_L"])
    ratio = params.get("ratio") if ratio is None else ratio
    if ratio is not None:
        k_L, k_G = complex(ratio), 1.0 + 0j
    else:
        k_L = to_complex(params.get("k_L", 1.0))
        k_G = to_complex(params.get("k_G", 1.0))
    return cs.LactoseParams(alpha, beta, params["p_plus_L"], params["p_plus_G"], k_L, k_G,
                            params.get("phase_minus_L", 0.0), params.get("phase_minus_G", 0.0))


def bayes_params(params: dict) -> cs.BayesParams:
    family = params.get("bias_family", "identity")
    strength = params.get("bias_strength", 0.0)
    if "bias_angle" in params:
        v = cs.BIAS_FAMILIES[family](params["bias_angle"])
    else:
        v = cs.BIAS_FAMILIES[family]()
    return cs.BayesParams(params["p_A"], params["p_C_given_A"], params["p_C_given_B"],
                          cs.bias_state(strength), v)


def fit_lactose(params: dict, target: float) -> ScenarioReport:
    """Fit the preference ratio to ``target`` and report the scenario at the fit."""
    base = lactose_params(params, ratio=1.0)
    fit = cs.fit_preference_ratio(base.alpha, base.beta, base.p_plus_L, base.p_plus_G, target)
    report = cs.lactose_scenario(lactose_params(params, ratio=fit.ratio))
    report.fitted["ratio"] = fit.ratio
    report.fitted["target"] = target
    for i, r in enumerate(fit.roots):
        report.fitted[f"root{i}"] = r
    if fit.degenerate:
        report.warnings.append("degenerate fit: activation probability does not depend on the ratio")
    return report


def _matrix(raw) -> np.ndarray:
    return np.array([[to_complex(x) for x in row] for row in raw], dtype=complex)


def _events(raw: dict) -> EventSystem:
    effects = [_matrix(m) for m in raw["effects"]]
    labels = raw.get("labels", list(range(len(effects))))
    return EventSystem(tuple(labels), tuple(effects))


def custom_scenario(params: dict) -> ScenarioReport:
    """Joint-like table for a user-supplied state, lifting and pair of event systems.

    Lifting types: ``isometric`` (``isometry``, optional ``dims``),
    ``product`` (ancilla ``state``) and ``compound`` (``kraus`` operators).
    The law compares ``tr(rho E_0)`` with the joint-like marginal ``Σ_k P(b_0, a_k)``.
    """
    rho = DensityState(_matrix(params["state"]))
    spec = params["lifting"]
    kind = spec.get("type")
    if kind == "isometric":
        lift = isometric_lifting(_matrix(spec["isometry"]), tuple(spec["dims"]) if "dims" in spec else None)
    elif kind == "product":
        lift = product_lifting(DensityState(_matrix(spec["state"])), rho.size)
    elif kind == "compound":
        lift = compound_lifting(KrausChannel([_matrix(k) for k in spec["kraus"]]), input_dim=rho.size)
    else:
        raise ValueError(f"unknown lifting type {kind!r}")
    sc = AdaptiveScenario(rho, lift, _events(params["system_a"]), _events(params["system_b"]))
    table = joint_like_table(sc)
    probs = {f"P({b},{a})": table[j, k] for j, b in enumerate(table.row_labels)
             for k, a in enumerate(table.col_labels)}
    lhs = None
    if sc.system_b.dim == rho.size:
        lhs = expectation(rho, sc.system_b.effects[0])
    return ScenarioReport("custom-lifting", {}, probs, lhs=lhs,
                          rhs=float(table.row_sums()[0]) if lhs is not None else None)


def _run_once(cfg: ScenarioConfig, params: dict) -> ScenarioReport:
    if cfg.kind == "tongue":
        return cs.tongue_scenario(tongue_params(params), unread=params.get("unread", False))
    if cfg.kind == "lactose":
        if "target" in params and "ratio" not in params and "k_L" not in params:
            return fit_lactose(params, params["target"])
        return cs.lactose_scenario(lactose_params(params))
    if cfg.kind == "bayes":
        observed = params.get("observed", "C")
        return cs.bayes_scenario(bayes_params(params), observed, params.get("bias_strength"))
    return custom_scenario(params)


def run(cfg: ScenarioConfig) -> list[ScenarioReport]:
    """One report, or one per sweep grid point in grid order."""
    if cfg.sweep is None:
        return [_run_once(cfg, cfg.params)]
    reports = []
    for value in cfg.sweep.grid():
        params = dict(cfg.params)
        params[cfg.sweep.param] = float(value)
        report = _run_once(cfg, params)
        report.parameters.setdefault(f"sweep:{cfg.sweep.param}", float(value))
        reports.append(report)
    return reports
