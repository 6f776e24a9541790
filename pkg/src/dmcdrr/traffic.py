"""Seeded traffic sources.

Stochastic traffic uses SplitMix64 in counter mode so that the k-th draw of a
flow can be computed directly from ``(seed, flow_id, k)``:

    GAMMA = 0x9E3779B97F4A7C15
    mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
             z = (z ^ (z >> 27)) * 0x94D049BB133111EB
             return z ^ (z >> 31)                       (all mod 2**64)
    key(seed, flow) = mix(mix(seed) ^ flow)
    raw(seed, flow, j) = mix(key + (j + 1) * GAMMA)

Arrival ``k`` of a flow consumes ``raw(2k)`` for the inter-frame gap and
``raw(2k + 1)`` for the frame size:

    u     = ((raw >> 11) + 1) / 2**53                   in (0, 1]
    gap   = -mean * ln(u)                               (rounded to whole ns)
    size  = size_min + raw % (size_max - size_min + 1)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

TRACE_HEADER = ("time_ns", "flow_id", "size_bytes")


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, flow_id: int) -> int:
    return mix64(mix64(seed) ^ flow_id)


def raw_block(key: int, start: int, count: int) -> np.ndarray:
    """Raw outputs ``start .. start + count - 1`` of the stream with ``key``."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + idx * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def unit_interval(raw: np.ndarray) -> np.ndarray:
    """Map raw 64-bit outputs onto (0, 1] using the top 53 bits."""
    return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


@dataclass(frozen=True)
class TrafficSpec:
    mean_interframe: float = 48e-6
    size_min: int = 64
    size_max: int = 1518
    seed: int = 1

    def __post_init__(self):
        if not self.mean_interframe > 0:
            raise ValueError("mean_interframe must be positive")
        if not 0 < self.size_min <= self.size_max:
            raise ValueError("need 0 < size_min <= size_max")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def mean_interframe_ns(self) -> float:
        # via decimal so 48e-6 s maps to exactly 48000 ns
        return float(Decimal(repr(self.mean_interframe)) * 1_000_000_000)


class FlowStream:
    """Arrival draws for one flow, generated in blocks."""

    def __init__(self, spec: TrafficSpec, flow_id: int, block: int = 4096):
        self.spec = spec
        self.flow_id = flow_id
        self.key = stream_key(spec.seed, flow_id)
        self.block = block
        self.drawn = 0
        self._draws = self._generate()

    def _block(self) -> tuple[list[int], list[int]]:
        raw = raw_block(self.key, 2 * self.drawn, 2 * self.block)
        self.drawn += self.block
        u = unit_interval(raw[0::2])
        gaps = np.rint(-self.spec.mean_interframe_ns * np.log(u)).astype(np.int64)
        span = self.spec.size_max - self.spec.size_min + 1
        sizes = raw[1::2] % np.uint64(span) + np.uint64(self.spec.size_min)
        return gaps.tolist(), sizes.astype(np.int64).tolist()

    def _generate(self) -> Iterator[tuple[int, int]]:
        while True:
            yield from zip(*self._block())

    def next_ns(self) -> tuple[int, int]:
        """Next ``(gap_ns, size_bytes)`` pair."""
        return next(self._draws)


class StochasticSource:
    """Independent exponential/uniform arrivals for flows ``1..n_flows``.

    Inter-frame times are start-to-start: each flow is a renewal process
    starting at time zero, so its first frame arrives after one gap.
    """

    def __init__(self, spec: TrafficSpec, n_flows: int):
        self.spec = spec
        self.streams = {f: FlowStream(spec, f) for f in range(1, n_flows + 1)}
        self._draws = {f: s._draws for f, s in self.streams.items()}

    def next_arrival(self, flow_id: int) -> tuple[float, int]:
        """Next inter-frame gap (seconds) and frame size (bytes) for a flow."""
        gap, size = self.streams[flow_id].next_ns()
        return gap * 1e-9, size

    def initial(self) -> Iterator[tuple[int, int, int]]:
        for flow_id, stream in self.streams.items():
            gap, size = stream.next_ns()
            yield gap, flow_id, size

    def after(self, flow_id: int, time_ns: int) -> tuple[int, int] | None:
        gap, size = next(self._draws[flow_id])
        return time_ns + gap, size


class TraceSource:
    """Replays a fixed list of ``(time_ns, flow_id, size_bytes)`` arrivals."""

    def __init__(self, records: Iterable[tuple[int, int, int]]):
        self.records = [(int(t), int(f), int(s)) for t, f, s in records]
        last = -1
        for t, f, s in self.records:
            if t < last:
                raise ValueError(f"trace times must be non-decreasing (t={t} after {last})")
            if s <= 0:
                raise ValueError(f"frame size must be positive, got {s}")
            last = t

    @classmethod
    def from_csv(cls, path: str | Path) -> "TraceSource":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
                raise ValueError(f"{path}: expected header {','.join(TRACE_HEADER)}")
            rows = [tuple(int(v) for v in row) for row in reader if row]
        return cls(rows)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            w.writerows(self.records)

    def max_flow(self) -> int:
        return max((f for _, f, _ in self.records), default=0)

    def initial(self) -> Iterator[tuple[int, int, int]]:
        return iter(self.records)

    def after(self, flow_id: int, time_ns: int) -> None:
        return None


def offered_load_bps(spec: TrafficSpec, n_flows: int) -> float:
    mean_size = (spec.size_min + spec.size_max) / 2
    return n_flows * mean_size * 8 / spec.mean_interframe
