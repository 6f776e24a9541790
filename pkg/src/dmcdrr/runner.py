"""Scenario runs, A/B seed sweeps, and CSV report emission."""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, NamedTuple

from .config import ConfigError, ScenarioConfig
from .engine import ResourceTable, Simulator
from .metrics import Report
from .scheduler import MultiChannelDRR
from .traffic import StochasticSource, TraceSource, TrafficSpec

FLOW_HEADER = ("flow_id", "frames_rx", "bytes_rx", "drops", "throughput_bps", "mean_delay_ns")
SUMMARY_HEADER = ("scheduler", "W", "M", "seed", "aggregate_bps", "jain_index")
COMPARE_HEADER = ("seed", "sched", "aggregate_bps", "jain_index", "min_flow_bps", "max_flow_bps")

# fields that may differ between the two arms of a comparison
_NON_SCENARIO = ("scheduler", "seed", "output", "audit")


def build_simulator(config: ScenarioConfig) -> Simulator:
    config.validate()
    if config.trace:
        try:
            source = TraceSource.from_csv(config.trace)
        except (OSError, ValueError) as exc:
            raise ConfigError("trace", str(exc)) from None
        if source.max_flow() > config.channels:
            raise ConfigError("trace", f"flow {source.max_flow()} exceeds channels={config.channels}")
    else:
        spec = TrafficSpec(config.mean_interframe, config.size_min, config.size_max, config.seed)
        source = StochasticSource(spec, config.channels)
    scheduler = MultiChannelDRR(
        config.channels,
        quantum=config.quantum,
        capacity=config.voq_capacity,
        dual=config.scheduler == "dmcdrr",
        accumulate_always=config.accumulate_always,
        arbitration=config.arbitration,
    )
    resources = ResourceTable(config.transmitters, config.channels, config.line_rate)
    return Simulator(scheduler, resources, source, seed=config.seed,
                     warmup_ns=config.warmup_ns, audit=config.audit)


def simulate(config: ScenarioConfig) -> tuple[Report, Simulator]:
    sim = build_simulator(config)
    return sim.run_ns(config.duration_ns), sim


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return repr(x) if isinstance(x, float) else str(x)


def flow_rows(report: Report) -> list[tuple]:
    return [
        (f.flow_id, f.frames_rx, f.bytes_rx, f.drops, rate, f.mean_delay_ns)
        for f, rate in zip(report.flows, report.throughputs)
    ]


def summary_row(report: Report) -> tuple:
    return (report.scheduler, report.channels, report.transmitters, report.seed,
            report.aggregate_bps, report.jain_index)


def write_csv(path: Path, header: Iterable[str], rows: Iterable[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def run_scenario(config: ScenarioConfig, out_dir: str | Path | None = None) -> Report:
    """Run one scenario; writes flows.csv, summary.csv (and audit.csv) if ``out_dir``."""
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    report, sim = simulate(config)
    if out is not None:
        write_csv(out / "flows.csv", FLOW_HEADER, flow_rows(report))
        write_csv(out / "summary.csv", SUMMARY_HEADER, [summary_row(report)])
        if sim.audit is not None:
            sim.audit.write_csv(out / "audit.csv")
    return report


class ComparisonRow(NamedTuple):
    seed: int
    sched: str
    aggregate_bps: float
    jain_index: float | None
    min_flow_bps: float
    max_flow_bps: float


def _scenario_key(config: ScenarioConfig) -> dict:
    d = dataclasses.asdict(config)
    for name in _NON_SCENARIO:
        d.pop(name)
    return d


def _compare_one(config: ScenarioConfig) -> ComparisonRow:
    report, _ = simulate(config.replace(audit=False))
    return ComparisonRow(config.seed, config.scheduler, report.aggregate_bps,
                         report.jain_index, report.min_flow_bps, report.max_flow_bps)


def compare(config_a: ScenarioConfig, config_b: ScenarioConfig, seeds: Iterable[int],
            jobs: int = 1) -> list[ComparisonRow]:
    """Run both configs for every seed; rows sorted by (seed, scheduler)."""
    key_a, key_b = _scenario_key(config_a), _scenario_key(config_b)
    diff = sorted(k for k in key_a if key_a[k] != key_b[k])
    if diff:
        raise ConfigError(diff[0], "compared configs may differ only in scheduler")
    runs = [cfg.replace(seed=s).validate() for s in seeds for cfg in (config_a, config_b)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_compare_one, runs))
    else:
        rows = [_compare_one(cfg) for cfg in runs]
    return sorted(rows, key=lambda r: (r.seed, r.sched))


def write_comparison(rows: list[ComparisonRow], path: str | Path) -> None:
    write_csv(Path(path), COMPARE_HEADER, rows)
