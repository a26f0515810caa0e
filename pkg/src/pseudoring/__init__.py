"""Pseudo-ring (virtual LFSR) memory self-test simulator."""

from .engine import (
    IterationConfig,
    IterationOutcome,
    LaneNetwork,
    Schedule,
    Trajectory,
    run_iteration,
    run_schedule,
)
from .faults import DEFAULT_CATALOG, FaultInstance, FaultyMemory, enumerate_instances, parse_fp
from .galois import FeedbackSpec, FieldSpec, sequence_period
from .memory import Memory, MemorySpec

__all__ = [
    "DEFAULT_CATALOG",
    "FaultInstance",
    "FaultyMemory",
    "FeedbackSpec",
    "FieldSpec",
    "IterationConfig",
    "IterationOutcome",
    "LaneNetwork",
    "Memory",
    "MemorySpec",
    "Schedule",
    "Trajectory",
    "enumerate_instances",
    "parse_fp",
    "run_iteration",
    "run_schedule",
    "sequence_period",
]
