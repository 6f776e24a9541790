from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence


@dataclass
class FlowStats:
    flow_id: int
    frames_rx: int = 0
    bytes_rx: int = 0
    drops: int = 0
    delay_sum_ns: int = 0

    @property
    def mean_delay_ns(self) -> float:
        return self.delay_sum_ns / self.frames_rx if self.frames_rx else 0.0


def throughput(bytes_rx: int | FlowStats, duration: float) -> float:
    """Receiver-side throughput in bits per second."""
    if isinstance(bytes_rx, FlowStats):
        bytes_rx = bytes_rx.bytes_rx
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    return bytes_rx * 8 / duration


def jain_index(xs: Sequence[float]) -> float:
    """Jain's fairness index, (sum x)^2 / (n * sum x^2)."""
    if len(xs) == 0:
        raise ValueError("jain_index of an empty sequence")
    if any(x < 0 for x in xs):
        raise ValueError("jain_index needs non-negative values")
    peak = max(xs)
    if peak == 0:
        raise ValueError("jain_index is undefined when every value is zero")
    # scaling by the peak keeps the squares clear of underflow and overflow
    ys = [x / peak for x in xs]
    total = math.fsum(ys)
    return total * total / (len(ys) * math.fsum(y * y for y in ys))


@dataclass
class Report:
    scheduler: str
    channels: int
    transmitters: int
    seed: int | None
    duration: float
    flows: list[FlowStats]
    throughputs: list[float]
    aggregate_bps: float
    jain_index: float | None
    counters: dict[str, int] = field(default_factory=dict)

    @property
    def min_flow_bps(self) -> float:
        return min(self.throughputs, default=0.0)

    @property
    def max_flow_bps(self) -> float:
        return max(self.throughputs, default=0.0)


def build_report(scheduler: str, flows: list[FlowStats], duration: float, *,
                 channels: int, transmitters: int, seed: int | None = None,
                 counters: dict[str, int] | None = None) -> Report:
    if duration > 0:
        rates = [throughput(f, duration) for f in flows]
    else:
        rates = [0.0] * len(flows)
    jain = jain_index(rates) if rates and any(rates) else None
    return Report(
        scheduler=scheduler,
        channels=channels,
        transmitters=transmitters,
        seed=seed,
        duration=duration,
        flows=flows,
        throughputs=rates,
        aggregate_bps=math.fsum(rates),
        jain_index=jain,
        counters=dict(counters or {}),
    )
