"""Single (MCDRR) and dual (D-MCDRR) multi-channel deficit round-robin.

Flows are numbered ``1..n``. Flow ``i`` owns VOQ ``i`` and is bound to
channel ``i`` (fixed receivers). Every transmitter is tunable, so any free
transmitter can carry any flow whose channel is idle.

A round-robin pointer serves at most one frame per flow per round. Deficit
counters are replenished lazily when the pointer visits a flow, which keeps
each visit O(1) no matter how many flows the partition holds.
"""

from __future__ import annotations

from collections import deque
from enum import Enum
from typing import NamedTuple, Protocol, Sequence


class ConfigurationError(ValueError):
    """Scheduler or scenario parameters that cannot describe a valid run."""


class SimulationError(RuntimeError):
    """An internal invariant was violated; the run cannot continue."""


class Frame:
    __slots__ = ("frame_id", "flow_id", "size_bytes", "arrival_ns", "departure_ns")

    def __init__(self, frame_id: int, flow_id: int, size_bytes: int, arrival_ns: int = 0):
        self.frame_id = frame_id
        self.flow_id = flow_id
        self.size_bytes = size_bytes
        self.arrival_ns = arrival_ns
        self.departure_ns: int | None = None

    @property
    def arrival_time(self) -> float:
        return self.arrival_ns * 1e-9

    @property
    def departure_time(self) -> float | None:
        return None if self.departure_ns is None else self.departure_ns * 1e-9

    def __repr__(self):
        return f"Frame(id={self.frame_id}, flow={self.flow_id}, size={self.size_bytes})"


class FlowState:
    __slots__ = (
        "flow_id", "channel_id", "voq", "capacity", "deficit_counter",
        "round_stamp", "num_pkts_scheduled", "drops",
    )

    def __init__(self, flow_id: int, capacity: int = 1000):
        self.flow_id = flow_id
        self.channel_id = flow_id
        self.voq: deque[Frame] = deque()
        self.capacity = capacity
        self.deficit_counter = 0
        self.round_stamp = 0
        self.num_pkts_scheduled = 0
        self.drops = 0

    def __repr__(self):
        return (f"FlowState(flow={self.flow_id}, qlen={len(self.voq)}, "
                f"dc={self.deficit_counter}, round={self.round_stamp})")


class SchedulerState:
    """One round-robin pointer over an ordered partition of flow ids."""

    __slots__ = ("partition", "pointer", "round_number", "quantum", "service_cost", "vclock")

    def __init__(self, partition: Sequence[int], quantum: int):
        if not partition:
            raise ConfigurationError("a scheduler needs at least one flow")
        if quantum < 1:
            raise ConfigurationError("quantum must be a positive number of bytes")
        self.partition = list(partition)
        self.pointer = 0
        self.round_number = 1
        self.quantum = quantum
        # Arbitration between pointers sharing a transmitter pool: each service
        # costs len(other partition) virtual units, so both advance at equal
        # per-flow rates.
        self.service_cost = 1
        self.vclock = 0

    def advance(self) -> None:
        self.pointer += 1
        if self.pointer == len(self.partition):
            self.pointer = 0
            self.round_number += 1

    def __repr__(self):
        return (f"SchedulerState(flows={self.partition[0]}..{self.partition[-1]}, "
                f"pointer={self.pointer}, round={self.round_number})")


class Skip(str, Enum):
    EMPTY = "empty"
    ALREADY_SERVED = "already_served_this_round"
    CHANNEL_BUSY = "channel_busy"
    DC_TOO_SMALL = "dc_too_small"
    NO_TRANSMITTER = "no_transmitter"


class Served(NamedTuple):
    frame: Frame
    transmitter_id: int
    channel_id: int
    dc_before: int
    dc_after: int
    round_number: int
    finish_ns: int

    @property
    def flow_id(self) -> int:
        return self.frame.flow_id


class Skipped(NamedTuple):
    flow_id: int
    reason: Skip


class Resources(Protocol):
    free_count: int

    def free_transmitter(self) -> int | None: ...
    def channel_free(self, channel_id: int) -> bool: ...
    def occupy(self, transmitter_id: int, channel_id: int, frame_id: int) -> None: ...
    def transmission_ns(self, channel_id: int, size_bytes: int) -> int: ...


def partition_flows(n: int) -> tuple[list[int], list[int]]:
    """Split flows ``1..n`` into a low half of ceil(n/2) and a high half."""
    if n < 2:
        raise ConfigurationError(f"dual scheduling needs at least 2 flows, got {n}")
    mid = (n + 1) // 2
    return list(range(1, mid + 1)), list(range(mid + 1, n + 1))


def replenish_on_visit(flow: FlowState, sched: SchedulerState,
                       accumulate_always: bool = False) -> int:
    """Apply the deficit-counter update for a pointer visit.

    Returns the number of quantum grants applied (0 when already current).
    An empty VOQ forfeits its credit unless ``accumulate_always`` is set.
    """
    if not flow.voq and not accumulate_always:
        flow.deficit_counter = 0
        if flow.round_stamp < sched.round_number:
            flow.round_stamp = sched.round_number
            flow.num_pkts_scheduled = 0
        return 0
    gap = sched.round_number - flow.round_stamp
    if gap <= 0:
        return 0
    flow.deficit_counter += sched.quantum * gap
    flow.round_stamp = sched.round_number
    flow.num_pkts_scheduled = 0
    return gap


def try_serve(flow: FlowState, resources: Resources, now_ns: int,
              round_number: int = 0) -> Served | Skipped:
    """Serve the head-of-line frame of ``flow`` if every gate is open."""
    if not flow.voq:
        return Skipped(flow.flow_id, Skip.EMPTY)
    if flow.num_pkts_scheduled:
        return Skipped(flow.flow_id, Skip.ALREADY_SERVED)
    if not resources.channel_free(flow.channel_id):
        return Skipped(flow.flow_id, Skip.CHANNEL_BUSY)
    head = flow.voq[0]
    if head.size_bytes > flow.deficit_counter:
        return Skipped(flow.flow_id, Skip.DC_TOO_SMALL)
    tx = resources.free_transmitter()
    if tx is None:
        return Skipped(flow.flow_id, Skip.NO_TRANSMITTER)

    flow.voq.popleft()
    before = flow.deficit_counter
    flow.deficit_counter = before - head.size_bytes
    flow.num_pkts_scheduled = 1
    resources.occupy(tx, flow.channel_id, head.frame_id)
    finish = now_ns + resources.transmission_ns(flow.channel_id, head.size_bytes)
    return Served(head, tx, flow.channel_id, before, flow.deficit_counter, round_number, finish)


class MultiChannelDRR:
    """VOQs plus one (MCDRR) or two (D-MCDRR) round-robin pointers.

    ``arbitration`` decides which pointer gets a freed transmitter when both
    have eligible flows:

    * ``"fair"``: the pointer with the smaller virtual clock goes next, one
      service at a time. A pointer that runs out of eligible flows is pulled
      up to the other's clock so idle time cannot be banked.
    * ``"strict"``: the first pointer's pass runs to completion, then the
      second's.
    """

    def __init__(self, n_flows: int, quantum: int = 1518, capacity: int = 1000,
                 dual: bool = False, accumulate_always: bool = False,
                 arbitration: str = "fair"):
        if n_flows < 1:
            raise ConfigurationError("need at least one flow")
        if capacity < 1:
            raise ConfigurationError("voq_capacity must be at least 1")
        if arbitration not in ("fair", "strict"):
            raise ConfigurationError(f"unknown arbitration {arbitration!r}")
        self.n_flows = n_flows
        self.quantum = quantum
        self.dual = dual
        self.accumulate_always = accumulate_always
        self.arbitration = arbitration
        self.flows = {f: FlowState(f, capacity) for f in range(1, n_flows + 1)}
        if dual:
            low, high = partition_flows(n_flows)
            self.pointers = [SchedulerState(low, quantum), SchedulerState(high, quantum)]
            self.pointers[0].service_cost = len(high)
            self.pointers[1].service_cost = len(low)
        else:
            self.pointers = [SchedulerState(list(self.flows), quantum)]
        self.audit = None
        self.visits = 0
        self.passes = 0
        self.services = 0

    @property
    def label(self) -> str:
        return "dmcdrr" if self.dual else "mcdrr"

    def flow(self, flow_id: int) -> FlowState:
        try:
            return self.flows[flow_id]
        except KeyError:
            raise ConfigurationError(f"unknown flow id {flow_id}") from None

    def enqueue(self, flow_id: int, frame: Frame) -> bool:
        """Append to the flow's VOQ; False (and a counted drop) when full."""
        try:
            flow = self.flows[flow_id]
        except KeyError:
            raise ConfigurationError(f"unknown flow id {flow_id}") from None
        if len(flow.voq) >= flow.capacity:
            flow.drops += 1
            return False
        flow.voq.append(frame)
        return True

    def backlog(self) -> int:
        return sum(len(f.voq) for f in self.flows.values())

    def scheduling_pass(self, sched: SchedulerState, resources: Resources, now_ns: int,
                        max_services: int | None = None) -> list[Served | Skipped]:
        """Walk one pointer from its current position until it must stop.

        Stops when no transmitter is free, after ``max_services`` services, or
        after a full cycle with no service in which no flow was held back only
        by its deficit counter (more rounds could not make anything eligible).
        """
        flows = self.flows
        partition = sched.partition
        n = len(partition)
        audit = self.audit
        out: list[Served | Skipped] = []
        served = 0
        idle = 0
        credit_pending = False
        while resources.free_count:
            flow = flows[partition[sched.pointer]]
            dc_before = flow.deficit_counter
            grants = replenish_on_visit(flow, sched, self.accumulate_always)
            if audit is not None and flow.deficit_counter != dc_before:
                audit.record(now_ns, "replenish" if grants else "reset", flow.flow_id, -1,
                             dc_before, flow.deficit_counter, -1, sched.round_number)
            decision = try_serve(flow, resources, now_ns, sched.round_number)
            sched.advance()
            self.visits += 1
            out.append(decision)
            if type(decision) is Served:
                served += 1
                self.services += 1
                sched.vclock += sched.service_cost
                if audit is not None:
                    audit.record(now_ns, "serve", flow.flow_id, decision.frame.frame_id,
                                 decision.dc_before, decision.dc_after,
                                 decision.transmitter_id, decision.round_number)
                if max_services is not None and served >= max_services:
                    break
                idle = 0
                credit_pending = False
                continue
            if decision.reason is Skip.DC_TOO_SMALL:
                credit_pending = True
            idle += 1
            if idle >= n:
                if not credit_pending:
                    break
                idle = 0
                credit_pending = False
        return out

    def run_pass(self, resources: Resources, now_ns: int) -> list[Served | Skipped]:
        """Offer free transmitters to the pointer(s); returns every decision."""
        self.passes += 1
        if not self.dual:
            return self.scheduling_pass(self.pointers[0], resources, now_ns)
        if self.arbitration == "strict":
            out = []
            for sched in self.pointers:
                out += self.scheduling_pass(sched, resources, now_ns)
            return out

        out = []
        active = list(self.pointers)
        while active and resources.free_count:
            sched = active[0]
            if len(active) == 2 and active[1].vclock < sched.vclock:
                sched = active[1]
            decisions = self.scheduling_pass(sched, resources, now_ns, max_services=1)
            out += decisions
            if not decisions or type(decisions[-1]) is not Served:
                if not resources.free_count:
                    break
                active.remove(sched)
                for other in self.pointers:
                    if other is not sched and other.vclock > sched.vclock:
                        sched.vclock = other.vclock
        return out
