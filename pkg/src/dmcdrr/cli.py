"""Command-line entry point.

    dmcdrr run --config case1.conf --seed 3 --out results/
    dmcdrr compare --config case1.conf --seeds 1-5 --out results/
    dmcdrr run --dump-config > my.conf

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, coerce, load_config
from .runner import compare, run_scenario, write_comparison
from .scheduler import ConfigurationError, SimulationError

log = logging.getLogger("dmcdrr")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def parse_seeds(text: str) -> list[int]:
    """``"1,2,5"`` or ``"1-5"`` (inclusive) or a mix of both."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(x) for x in part.split("-", 1))
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key = value scenario file")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--duration", type=float, metavar="SECONDS", help="override simulated time")
    p.add_argument("--scheduler", choices=("mcdrr", "dmcdrr"))
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective config and exit")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmcdrr", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    _common(run)
    run.add_argument("--audit", action="store_true", help="also write audit.csv")
    run.add_argument("--trace", metavar="PATH", help="replay arrivals from a trace CSV")

    cmp_ = sub.add_parser("compare", help="MCDRR vs D-MCDRR over a list of seeds")
    _common(cmp_)
    cmp_.add_argument("--config-b", metavar="PATH",
                      help="second arm; defaults to --config with the other scheduler")
    cmp_.add_argument("--seeds", default="1-5", help="e.g. 1-5 or 1,4,9")
    cmp_.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def effective_config(args: argparse.Namespace, path: str | None = None) -> ScenarioConfig:
    path = path or args.config
    config = load_config(path) if path else ScenarioConfig()
    changes = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError("--set", f"expected KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        changes[key.strip()] = coerce(key.strip(), value)
    for name in ("seed", "duration", "scheduler"):
        if getattr(args, name) is not None:
            changes[name] = getattr(args, name)
    if args.out is not None:
        changes["output"] = args.out
    if getattr(args, "audit", False):
        changes["audit"] = True
    if getattr(args, "trace", None):
        changes["trace"] = args.trace
    return config.replace(**changes).validate()


def _jain(value: float | None) -> str:
    return "nan" if value is None else f"{value:.7f}"


def _run(args) -> int:
    config = effective_config(args)
    if args.dump_config:
        sys.stdout.write(config.to_text())
        return EXIT_OK
    report = run_scenario(config, config.output)
    log.info("wrote %s/flows.csv and %s/summary.csv", config.output, config.output)
    print(f"{report.scheduler} W={report.channels} M={report.transmitters} seed={report.seed} "
          f"aggregate={report.aggregate_bps / 1e9:.6f} Gb/s jain={_jain(report.jain_index)}")
    return EXIT_OK


def _compare(args) -> int:
    config_a = effective_config(args)
    if args.config_b:
        config_b = effective_config(args, args.config_b)
    else:
        other = "mcdrr" if config_a.scheduler == "dmcdrr" else "dmcdrr"
        config_b = config_a.replace(scheduler=other).validate()
    if args.dump_config:
        sys.stdout.write(config_a.to_text())
        return EXIT_OK
    try:
        seeds = parse_seeds(args.seeds)
    except ValueError as exc:
        raise ConfigError("seeds", str(exc)) from None
    out = Path(config_a.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = compare(config_a, config_b, seeds, jobs=args.jobs)
    write_comparison(rows, out / "comparison.csv")
    for row in rows:
        print(f"seed={row.seed} {row.sched:<7} aggregate={row.aggregate_bps / 1e9:.6f} Gb/s "
              f"jain={_jain(row.jain_index)}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("run", "compare", "-h", "--help"):
        argv.insert(0, "run")
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = _run if args.command == "run" else _compare
    try:
        return handler(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except SimulationError as exc:
        print(f"error: simulation aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
