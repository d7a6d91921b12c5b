"""Gate-count and power/area/latency estimates.

Every constant is derived from two published post-synthesis anchor points
rather than typed in directly:

* 45 nm standard cells: a 1024 x 16 column is 1.7M gates, 1.65 mm^2, 7.96 mW.
* 7 nm with TNN7 macros: a 6,750-synapse column occupies 0.054 mm^2, draws
  39 uW and takes 28.14 ns per evaluation.

TNN7 macros save about 27% area, 17% power and 16% delay over 7 nm
standard cells.  The 7 nm standard-cell constants are the TNN7 ones divided
by 0.73 / 0.83 / 0.84, and the TNN7 model reuses them with those factors as
scales applied last, so a TNN7 report is the standard-cell report times the
factor bit for bit.  The model charges all gates to synapses
(no per-neuron term) since a single anchor cannot calibrate more.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

from ..spikes import DomainError

__all__ = [
    "GATES_PER_SYNAPSE",
    "PpaReport",
    "TECH_MODELS",
    "TNN7_FACTORS",
    "TechModel",
    "estimate_gates",
    "estimate_ppa",
    "tech_model",
]

GATES_PER_SYNAPSE = 103.76  # 1.7e6 gates / (1024 * 16) synapses, to 2 decimals

_ANCHOR_45_GATES = 1.7e6
_ANCHOR_45_AREA_MM2 = 1.65
_ANCHOR_45_POWER_MW = 7.96

_ANCHOR_7_SYNAPSES = 6750
_ANCHOR_7_AREA_MM2 = 0.054
_ANCHOR_7_POWER_MW = 0.039
_ANCHOR_7_LATENCY_NS = 28.14

# TNN7 value = standard-cell value * factor
TNN7_FACTORS = {"area": 0.73, "power": 0.83, "delay": 0.84}


def estimate_gates(p: int, q: int) -> int:
    if p < 1 or q < 1:
        raise DomainError("p and q must be >= 1")
    return int(GATES_PER_SYNAPSE * p * q + 0.5)


@dataclass(frozen=True)
class TechModel:
    node: str
    mode: str
    area_um2_per_gate: float
    power_w_per_gate: float
    column_latency_ns: Optional[float]
    provenance: str
    area_scale: float = 1.0
    power_scale: float = 1.0
    delay_scale: float = 1.0

    def __post_init__(self):
        for v in (self.area_um2_per_gate, self.power_w_per_gate, self.column_latency_ns,
                  self.area_scale, self.power_scale, self.delay_scale):
            if v is not None and not v > 0:
                raise DomainError("technology constants must be positive")

    @property
    def key(self) -> str:
        return f"{self.node}-{self.mode}"

    @property
    def effective_area_um2_per_gate(self) -> float:
        return self.area_um2_per_gate * self.area_scale

    @property
    def effective_power_w_per_gate(self) -> float:
        return self.power_w_per_gate * self.power_scale


def _build_models() -> dict:
    g45 = _ANCHOR_45_GATES
    g7 = estimate_gates(_ANCHOR_7_SYNAPSES, 1)
    std7 = TechModel(
        node="7nm",
        mode="std",
        area_um2_per_gate=_ANCHOR_7_AREA_MM2 * 1e6 / g7 / TNN7_FACTORS["area"],
        power_w_per_gate=_ANCHOR_7_POWER_MW * 1e-3 / g7 / TNN7_FACTORS["power"],
        column_latency_ns=_ANCHOR_7_LATENCY_NS / TNN7_FACTORS["delay"],
        provenance="7nm-tnn7 anchor divided by the TNN7 improvement factors",
    )
    tnn7 = replace(
        std7,
        mode="tnn7",
        area_scale=TNN7_FACTORS["area"],
        power_scale=TNN7_FACTORS["power"],
        delay_scale=TNN7_FACTORS["delay"],
        provenance=f"0.054 mm^2, 39 uW, 28.14 ns for a 6750-synapse column ({g7} estimated gates)",
    )
    std45 = TechModel(
        node="45nm",
        mode="std",
        area_um2_per_gate=_ANCHOR_45_AREA_MM2 * 1e6 / g45,
        power_w_per_gate=_ANCHOR_45_POWER_MW * 1e-3 / g45,
        column_latency_ns=None,
        provenance="1.65 mm^2, 7.96 mW for a 1.7M-gate 1024x16 column; latency not published",
    )
    return {m.key: m for m in (std45, std7, tnn7)}


TECH_MODELS = _build_models()


def tech_model(node: str, mode: str | None = None) -> TechModel:
    """Look up a model by ``"7nm-tnn7"`` style key or by (node, mode)."""
    key = node if mode is None else f"{node}-{mode}"
    try:
        return TECH_MODELS[key]
    except KeyError:
        raise DomainError(f"unknown technology {key!r}; choose from {sorted(TECH_MODELS)}") from None


@dataclass(frozen=True)
class PpaReport:
    gates: int
    area_mm2: float
    power_mw: float
    latency_ns: Optional[float]
    node: str
    mode: str

    def to_dict(self) -> dict:
        return {
            "gates": self.gates,
            "area_mm2": self.area_mm2,
            "power_mw": self.power_mw,
            "latency_ns": self.latency_ns,
            "node": self.node,
            "mode": self.mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def estimate_ppa(gate_count: int, tech: TechModel, stages: int = 1) -> PpaReport:
    """Scale per-gate constants; latency is ``stages`` sequential column evaluations."""
    if gate_count < 1:
        raise DomainError("gate_count must be >= 1")
    latency = None if tech.column_latency_ns is None else tech.column_latency_ns * stages * tech.delay_scale
    return PpaReport(
        gates=int(gate_count),
        area_mm2=gate_count * tech.area_um2_per_gate * 1e-6 * tech.area_scale,
        power_mw=gate_count * tech.power_w_per_gate * 1e3 * tech.power_scale,
        latency_ns=latency,
        node=tech.node,
        mode=tech.mode,
    )
