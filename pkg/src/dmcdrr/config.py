"""Scenario configuration in flat ``key = value`` text.

Blank lines and ``#`` comments are ignored. Times are in seconds, rates in
bits per second, sizes in bytes. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .scheduler import ConfigurationError

SCHEDULERS = ("mcdrr", "dmcdrr")
ARBITRATIONS = ("fair", "strict")


class ConfigError(ConfigurationError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ScenarioConfig:
    scheduler: str = "dmcdrr"
    channels: int = 20
    transmitters: int = 2
    line_rate: int = 1_000_000_000
    quantum: int = 1518
    voq_capacity: int = 1000
    duration: float = 5.0
    warmup: float = 0.0
    mean_interframe: float = 48e-6
    size_min: int = 64
    size_max: int = 1518
    seed: int = 1
    trace: str | None = None
    accumulate_always: bool = False
    arbitration: str = "fair"
    output: str = "out"
    audit: bool = False

    def validate(self) -> "ScenarioConfig":
        if self.scheduler not in SCHEDULERS:
            raise ConfigError("scheduler", f"expected one of {', '.join(SCHEDULERS)}, got {self.scheduler!r}")
        if self.channels < 1:
            raise ConfigError("channels", "need at least 1 channel")
        if self.scheduler == "dmcdrr" and self.channels < 2:
            raise ConfigError("channels", "dmcdrr splits flows between two pointers and needs at least 2")
        if self.transmitters < 1:
            raise ConfigError("transmitters", "need at least 1 transmitter")
        if self.line_rate < 1:
            raise ConfigError("line_rate", "must be a positive bit rate")
        if self.quantum < 1:
            raise ConfigError("quantum", "must be at least 1 byte")
        if self.voq_capacity < 1:
            raise ConfigError("voq_capacity", "must hold at least 1 frame")
        if self.duration < 0:
            raise ConfigError("duration", "must not be negative")
        if not 0 <= self.warmup <= self.duration:
            raise ConfigError("warmup", "must lie between 0 and duration")
        if not self.mean_interframe > 0:
            raise ConfigError("mean_interframe", "must be positive")
        if self.size_min < 1:
            raise ConfigError("size_min", "must be at least 1 byte")
        if self.size_max < self.size_min:
            raise ConfigError("size_max", "must be >= size_min")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must fit in 64 unsigned bits")
        if self.arbitration not in ARBITRATIONS:
            raise ConfigError("arbitration", f"expected one of {', '.join(ARBITRATIONS)}")
        return self

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @property
    def duration_ns(self) -> int:
        return seconds_to_ns(self.duration)

    @property
    def warmup_ns(self) -> int:
        return seconds_to_ns(self.warmup)

    def to_text(self) -> str:
        lines = ["# dmcdrr scenario"]
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                lines.append(f"# {f.name} =")
            elif isinstance(value, bool):
                lines.append(f"{f.name} = {'true' if value else 'false'}")
            else:
                lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def seconds_to_ns(seconds: float) -> int:
    # decimal keeps values like 48e-6 exact
    return int((Decimal(repr(seconds)) * 1_000_000_000).to_integral_value())


def _parse_int(name: str, text: str) -> int:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise ConfigError(name, f"expected an integer, got {text!r}") from None
    if value != value.to_integral_value():
        raise ConfigError(name, f"expected an integer, got {text!r}")
    return int(value)


def _parse_float(name: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(name, f"expected a number, got {text!r}") from None


def _parse_bool(name: str, text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(name, f"expected true/false, got {text!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def coerce(name: str, text: str):
    """Convert the textual value of config key ``name`` to its field type."""
    if name not in _FIELD_TYPES:
        raise ConfigError(name, "unknown key")
    kind = _FIELD_TYPES[name]
    text = text.strip()
    if kind == "int":
        return _parse_int(name, text)
    if kind == "float":
        return _parse_float(name, text)
    if kind == "bool":
        return _parse_bool(name, text)
    if kind == "str | None":
        return text or None
    return text


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = coerce(key, value)
    return dataclasses.replace(base or ScenarioConfig(), **values).validate()


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
