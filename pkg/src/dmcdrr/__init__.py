"""Single and dual multi-channel deficit round-robin schedulers and simulator."""

from .engine import AuditLog, AuditRecord, Event, EventKind, ResourceTable, Simulator
from .metrics import FlowStats, Report, jain_index, throughput
from .scheduler import (
    ConfigurationError,
    Frame,
    MultiChannelDRR,
    SimulationError,
    partition_flows,
)
from .traffic import StochasticSource, TraceSource, TrafficSpec

__all__ = [
    "AuditLog", "AuditRecord", "ConfigurationError", "Event", "EventKind", "FlowStats",
    "Frame", "MultiChannelDRR", "Report", "ResourceTable", "SimulationError", "Simulator",
    "StochasticSource", "TraceSource", "TrafficSpec", "jain_index", "partition_flows",
    "throughput",
]
