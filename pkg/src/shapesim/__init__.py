"""Trace-driven cluster simulator with predictive resource shaping."""

from .domain import ResourceVector, ResourceUnderflowError, rv_fits, rv_sub_checked
from .engine import SimConfig, SimulationReport, run
from .forecast import ForecasterKind, PredictiveDistribution
from .shaper import BufferParams, ShapingPlan
from .workload import WorkloadConfig, WorkloadTrace, generate, load_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "BufferParams",
    "ForecasterKind",
    "PredictiveDistribution",
    "ResourceUnderflowError",
    "ResourceVector",
    "ShapingPlan",
    "SimConfig",
    "SimulationReport",
    "WorkloadConfig",
    "WorkloadTrace",
    "generate",
    "load_trace",
    "run",
    "rv_fits",
    "rv_sub_checked",
    "write_trace",
    "__version__",
]
