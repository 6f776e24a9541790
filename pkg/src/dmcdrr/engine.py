"""Discrete-event kernel for one hybrid TDM/WDM link.

The clock is an integer count of nanoseconds. Events leave the queue in
``(time, seq)`` order, where ``seq`` is the insertion ordinal. All events
sharing a timestamp are applied before the scheduler runs, so frames that
arrive together are all visible to the same scheduling pass.
"""

from __future__ import annotations

import csv
import heapq
import itertools
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import NamedTuple

from .metrics import FlowStats, Report, build_report
from .scheduler import Frame, MultiChannelDRR, Served, SimulationError

NS_PER_S = 1_000_000_000


class EventKind(IntEnum):
    ARRIVAL = 0
    TX_COMPLETE = 1


# plain ints inside the heap; IntEnum comparisons are slow on the hot path
ARRIVAL = int(EventKind.ARRIVAL)
TX_COMPLETE = int(EventKind.TX_COMPLETE)


@dataclass(frozen=True)
class Event:
    time_ns: int
    seq: int
    kind: EventKind
    flow_id: int = 0
    size_bytes: int = 0
    transmitter_id: int = 0
    channel_id: int = 0
    frame_id: int = 0

    @property
    def time(self) -> float:
        return self.time_ns / NS_PER_S


class ResourceTable:
    """Busy/free state of the transmitter pool and the per-flow channels."""

    def __init__(self, transmitters: int, channels: int, line_rate: int | list[int] = 10**9):
        if transmitters < 1:
            raise ValueError("need at least one transmitter")
        if channels < 1:
            raise ValueError("need at least one channel")
        rates = [line_rate] * channels if isinstance(line_rate, int) else list(line_rate)
        if len(rates) != channels or any(r <= 0 for r in rates):
            raise ValueError("every channel needs a positive line rate")
        # index 0 unused so ids stay 1-based
        self.transmitters: list[int | None] = [None] * (transmitters + 1)
        self.channels: list[int | None] = [None] * (channels + 1)
        self.line_rates = [0] + [int(r) for r in rates]
        self.free_count = transmitters

    def free_transmitter(self) -> int | None:
        if not self.free_count:
            return None
        txs = self.transmitters
        for i in range(1, len(txs)):
            if txs[i] is None:
                return i
        raise SimulationError("free transmitter count out of sync")

    def channel_free(self, channel_id: int) -> bool:
        return self.channels[channel_id] is None

    def occupy(self, transmitter_id: int, channel_id: int, frame_id: int) -> None:
        if self.transmitters[transmitter_id] is not None:
            raise SimulationError(f"transmitter {transmitter_id} already busy")
        if self.channels[channel_id] is not None:
            raise SimulationError(f"channel {channel_id} already busy")
        self.transmitters[transmitter_id] = frame_id
        self.channels[channel_id] = frame_id
        self.free_count -= 1

    def release(self, transmitter_id: int, channel_id: int, frame_id: int) -> None:
        if self.transmitters[transmitter_id] != frame_id:
            raise SimulationError(
                f"completion of frame {frame_id} on transmitter {transmitter_id}, "
                f"which carries {self.transmitters[transmitter_id]}")
        if self.channels[channel_id] != frame_id:
            raise SimulationError(
                f"completion of frame {frame_id} on channel {channel_id}, "
                f"which carries {self.channels[channel_id]}")
        self.transmitters[transmitter_id] = None
        self.channels[channel_id] = None
        self.free_count += 1

    def transmission_ns(self, channel_id: int, size_bytes: int) -> int:
        # ceiling division: never under-charge channel occupancy
        return -(-size_bytes * 8 * NS_PER_S // self.line_rates[channel_id])

    def busy_transmitters(self) -> int:
        return sum(t is not None for t in self.transmitters[1:])

    def busy_channels(self) -> int:
        return sum(c is not None for c in self.channels[1:])


class AuditRecord(NamedTuple):
    time: int
    action: str
    flow_id: int
    frame_id: int
    dc_before: int
    dc_after: int
    transmitter_id: int
    round_number: int


class AuditLog:
    """Append-only record of enqueue/drop/serve/complete actions.

    Deficit-counter changes made on a visit are logged too, as ``replenish``
    (quantum grants) or ``reset`` (credit forfeited by an empty VOQ).
    """

    def __init__(self):
        self.records: list[AuditRecord] = []

    def record(self, time, action, flow_id, frame_id, dc_before, dc_after,
               transmitter_id, round_number) -> None:
        self.records.append(AuditRecord(time, action, flow_id, frame_id, dc_before,
                                        dc_after, transmitter_id, round_number))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(AuditRecord._fields)
            w.writerows(self.records)


class Simulator:
    def __init__(self, scheduler: MultiChannelDRR, resources: ResourceTable, source, *,
                 seed: int | None = None, warmup_ns: int = 0, audit: bool = False):
        if len(resources.channels) - 1 != scheduler.n_flows:
            raise ValueError("one channel per flow is required")
        self.scheduler = scheduler
        self.resources = resources
        self.source = source
        self.seed = seed
        self.warmup_ns = warmup_ns
        self.audit = AuditLog() if audit else None
        scheduler.audit = self.audit
        self.now_ns = 0
        self._heap: list[tuple] = []
        self._seq = itertools.count()
        self._frame_ids = itertools.count(1)
        self._seeded = False
        self._pending = False
        self.in_flight: dict[int, Frame] = {}
        n = scheduler.n_flows
        self.frames_rx = [0] * (n + 1)
        self.bytes_rx = [0] * (n + 1)
        self.delay_sum = [0] * (n + 1)
        self.arrivals = 0
        self.completed = 0

    # -- event queue -------------------------------------------------------

    def push_event(self, time_ns: int, kind: EventKind, a: int = 0, b: int = 0, c=None) -> int:
        """Queue an event; returns its sequence number.

        Arrival: ``a`` = flow id, ``b`` = size in bytes.
        Completion: ``a`` = transmitter, ``b`` = channel, ``c`` = the Frame.
        """
        if time_ns < self.now_ns:
            raise SimulationError(f"event at {time_ns} ns is before the clock ({self.now_ns} ns)")
        seq = next(self._seq)
        heapq.heappush(self._heap, (time_ns, seq, kind, a, b, c))
        return seq

    def pop_event(self) -> Event:
        t, seq, kind, a, b, c = heapq.heappop(self._heap)
        self.now_ns = t
        if kind == EventKind.ARRIVAL:
            return Event(t, seq, EventKind.ARRIVAL, flow_id=a, size_bytes=b)
        return Event(t, seq, EventKind.TX_COMPLETE, flow_id=c.flow_id, size_bytes=c.size_bytes,
                     transmitter_id=a, channel_id=b, frame_id=c.frame_id)

    def __len__(self):
        return len(self._heap)

    # -- dispatch ----------------------------------------------------------

    def _seed_arrivals(self) -> None:
        for t, flow_id, size in self.source.initial():
            self.push_event(t, EventKind.ARRIVAL, flow_id, size)
        self._seeded = True

    def on_arrival(self, flow_id: int, size: int, now: int) -> bool:
        frame = Frame(next(self._frame_ids), flow_id, size, now)
        self.arrivals += 1
        accepted = self.scheduler.enqueue(flow_id, frame)
        if self.audit is not None:
            dc = self.scheduler.flows[flow_id].deficit_counter
            self.audit.record(now, "enqueue" if accepted else "drop", flow_id,
                              frame.frame_id, dc, dc, -1, -1)
        nxt = self.source.after(flow_id, now)
        if nxt is not None:
            heapq.heappush(self._heap, (nxt[0], next(self._seq), ARRIVAL, flow_id, nxt[1], None))
        if accepted and self.resources.free_count:
            self._pending = True
        return accepted

    def on_transmission_complete(self, frame: Frame, transmitter_id: int, channel_id: int,
                                 now: int) -> None:
        self.resources.release(transmitter_id, channel_id, frame.frame_id)
        del self.in_flight[frame.frame_id]
        frame.departure_ns = now
        self.completed += 1
        if now >= self.warmup_ns:
            f = frame.flow_id
            self.frames_rx[f] += 1
            self.bytes_rx[f] += frame.size_bytes
            self.delay_sum[f] += now - frame.arrival_ns
        if self.audit is not None:
            dc = self.scheduler.flows[frame.flow_id].deficit_counter
            self.audit.record(now, "complete", frame.flow_id, frame.frame_id, dc, dc,
                              transmitter_id, -1)
        self._pending = True

    def _run_pass(self, now: int) -> None:
        self._pending = False
        for d in self.scheduler.run_pass(self.resources, now):
            if type(d) is Served:
                self.in_flight[d.frame.frame_id] = d.frame
                heapq.heappush(self._heap, (d.finish_ns, next(self._seq), TX_COMPLETE,
                                            d.transmitter_id, d.channel_id, d.frame))

    def step(self) -> Event:
        """Apply one event, running any scheduling pass owed by earlier instants."""
        if not self._seeded:
            self._seed_arrivals()
        if self._pending and self._heap and self._heap[0][0] != self.now_ns:
            self._run_pass(self.now_ns)
        ev = self.pop_event()
        if ev.kind == EventKind.ARRIVAL:
            self.on_arrival(ev.flow_id, ev.size_bytes, ev.time_ns)
        else:
            frame = self.in_flight[ev.frame_id]
            self.on_transmission_complete(frame, ev.transmitter_id, ev.channel_id, ev.time_ns)
        return ev

    def run(self, until: float) -> Report:
        """Simulate up to ``until`` seconds and return the metrics report."""
        return self.run_ns(round(until * NS_PER_S))

    def run_ns(self, until_ns: int) -> Report:
        if not self._seeded:
            self._seed_arrivals()
        heap = self._heap
        pop = heapq.heappop
        while True:
            if self._pending and (not heap or heap[0][0] != self.now_ns):
                self._run_pass(self.now_ns)
                continue
            if not heap or heap[0][0] > until_ns:
                break
            t, _, kind, a, b, c = pop(heap)
            self.now_ns = t
            if kind == ARRIVAL:
                self.on_arrival(a, b, t)
            else:
                self.on_transmission_complete(c, a, b, t)
        self.now_ns = max(self.now_ns, until_ns)
        return self.report(until_ns)

    # -- results -----------------------------------------------------------

    def flow_stats(self) -> list[FlowStats]:
        return [
            FlowStats(f, self.frames_rx[f], self.bytes_rx[f],
                      self.scheduler.flows[f].drops, self.delay_sum[f])
            for f in range(1, self.scheduler.n_flows + 1)
        ]

    def counters(self) -> dict[str, int]:
        sched = self.scheduler
        return {
            "arrivals": self.arrivals,
            "completed": self.completed,
            "received": sum(self.frames_rx),
            "dropped": sum(f.drops for f in sched.flows.values()),
            "queued": sched.backlog(),
            "in_flight": len(self.in_flight),
            "services": sched.services,
            "visits": sched.visits,
            "passes": sched.passes,
        }

    def report(self, until_ns: int) -> Report:
        duration = max(until_ns - self.warmup_ns, 0) / NS_PER_S
        return build_report(
            self.scheduler.label, self.flow_stats(), duration,
            channels=self.scheduler.n_flows,
            transmitters=len(self.resources.transmitters) - 1,
            seed=self.seed, counters=self.counters(),
        )
