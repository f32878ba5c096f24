"""Contextual adaptive probability with quantum channels and liftings."""
from .operators import (
    DensityState,
    EventSystem,
    Operator,
    Projection,
    expectation,
    join_projection,
    meet_projection,
    partial_trace,
    tensor,
    validate,
)
from .report import ScenarioReport, emit_report

__all__ = [
    "DensityState", "EventSystem", "Operator", "Projection", "ScenarioReport",
    "emit_report", "expectation", "join_projection", "meet_projection",
    "partial_trace", "tensor", "validate",
]
__version__ = "0.1.0"
