"""Named statistics with units and scale factors, plus text reports.

Values are held in display units. An increment adds
``default_increment * scale``, so a descriptor with increment 0.001 and
scale 1000 moves by exactly one unit per call.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from decimal import Decimal

from .textcodec import FormatError, join_fields, parse_float, parse_int, split_fields, split_lines, unescape_str

STATS_MAGIC = "IDBGSTAT/1"
STAT_FIELD_COUNT = 9


class StatisticError(ValueError):
    pass


@dataclass(frozen=True)
class StatisticDescriptor:
    id: str
    description: str = ""
    unit: str = ""
    scale: float = 1.0
    initial_value: float = 0.0
    default_increment: float = 1.0
    default_decrement: float = 1.0

    def __post_init__(self):
        if not self.id or any(ch.isspace() for ch in self.id):
            raise StatisticError(f"invalid statistic id {self.id!r}")
        if not math.isfinite(self.scale) or self.scale == 0:
            raise StatisticError(f"scale must be finite and nonzero, got {self.scale!r}")
        for name in ("initial_value", "default_increment", "default_decrement"):
            if not math.isfinite(getattr(self, name)):
                raise StatisticError(f"{name} must be finite")


@dataclass
class StatisticState:
    descriptor: StatisticDescriptor
    value: float
    update_count: int = 0


def format_value(value: float) -> str:
    """Up to six significant digits, no exponent, trailing zeros trimmed."""
    text = f"{value:.6g}"
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    if text in ("-0", ""):
        text = "0"
    return text


class StatisticsRegistry:
    def __init__(self):
        self._lock = threading.Lock()
        self._stats: dict[str, StatisticState] = {}

    def _get(self, stat_id: str) -> StatisticState:
        try:
            return self._stats[stat_id]
        except KeyError:
            raise StatisticError(f"unknown statistic {stat_id!r}") from None

    def define(self, d: StatisticDescriptor) -> None:
        with self._lock:
            if d.id in self._stats:
                raise StatisticError(f"duplicate statistic {d.id!r}")
            self._stats[d.id] = StatisticState(d, float(d.initial_value))

    def increment(self, stat_id: str) -> float:
        with self._lock:
            st = self._get(stat_id)
            st.value += st.descriptor.default_increment * st.descriptor.scale
            st.update_count += 1
            return st.value

    def decrement(self, stat_id: str) -> float:
        with self._lock:
            st = self._get(stat_id)
            st.value -= st.descriptor.default_decrement * st.descriptor.scale
            st.update_count += 1
            return st.value

    def set_value(self, stat_id: str, value: float) -> None:
        value = float(value)
        if not math.isfinite(value):
            raise StatisticError(f"value must be finite, got {value!r}")
        with self._lock:
            self._get(stat_id).value = value

    def reset(self, stat_id: str) -> None:
        with self._lock:
            st = self._get(stat_id)
            st.value = float(st.descriptor.initial_value)
            st.update_count = 0

    def value(self, stat_id: str) -> float:
        with self._lock:
            return self._get(stat_id).value

    def state(self, stat_id: str) -> StatisticState:
        with self._lock:
            st = self._get(stat_id)
            return StatisticState(st.descriptor, st.value, st.update_count)

    def states(self) -> list[StatisticState]:
        with self._lock:
            return [
                StatisticState(st.descriptor, st.value, st.update_count)
                for _, st in sorted(self._stats.items())
            ]

    def report(self, stat_id: str) -> str:
        return _report_line(self.state(stat_id))

    def report_all(self) -> str:
        return "\n".join(_report_line(st) for st in self.states())

    def __contains__(self, stat_id):
        with self._lock:
            return stat_id in self._stats

    def __len__(self):
        with self._lock:
            return len(self._stats)


def _report_line(st: StatisticState) -> str:
    d = st.descriptor
    return f"{d.id}: {format_value(st.value)} {d.unit} (updates: {st.update_count}) — {d.description}"


# Module-level spellings of the registry methods.

def define_statistic(reg: StatisticsRegistry, d: StatisticDescriptor) -> None:
    reg.define(d)


def increment(reg: StatisticsRegistry, stat_id: str) -> float:
    return reg.increment(stat_id)


def decrement(reg: StatisticsRegistry, stat_id: str) -> float:
    return reg.decrement(stat_id)


def set_value(reg: StatisticsRegistry, stat_id: str, value: float) -> None:
    reg.set_value(stat_id, value)


def reset(reg: StatisticsRegistry, stat_id: str) -> None:
    reg.reset(stat_id)


def report(reg: StatisticsRegistry, stat_id: str) -> str:
    return reg.report(stat_id)


def report_all(reg: StatisticsRegistry) -> str:
    return reg.report_all()


# -- snapshot files ---------------------------------------------------------


def save_statistics(reg: StatisticsRegistry) -> bytes:
    lines = [STATS_MAGIC]
    for st in reg.states():
        d = st.descriptor
        lines.append(
            join_fields(
                [
                    d.id,
                    d.description,
                    d.unit,
                    repr(float(d.scale)),
                    repr(float(d.initial_value)),
                    repr(float(d.default_increment)),
                    repr(float(d.default_decrement)),
                    repr(float(st.value)),
                    str(st.update_count),
                ]
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def load_statistics(data: bytes | str) -> StatisticsRegistry:
    lines = split_lines(data)
    if not lines or lines[0] != STATS_MAGIC:
        raise FormatError(f"missing {STATS_MAGIC} header", 1)
    reg = StatisticsRegistry()
    for lineno, line in enumerate(lines[1:], start=2):
        raw = split_fields(line)
        if len(raw) != STAT_FIELD_COUNT:
            raise FormatError(
                f"statistic record has {len(raw)} fields, expected {STAT_FIELD_COUNT}", lineno
            )
        try:
            f = [unescape_str(x) for x in raw]
        except FormatError as exc:
            raise FormatError(str(exc), lineno) from None
        count = parse_int(f[8], "update count", lineno)
        value = parse_float(f[7], "value", lineno)
        if count < 0 or not math.isfinite(value):
            raise FormatError("invalid statistic state", lineno)
        try:
            d = StatisticDescriptor(
                id=f[0],
                description=f[1],
                unit=f[2],
                scale=parse_float(f[3], "scale", lineno),
                initial_value=parse_float(f[4], "initial value", lineno),
                default_increment=parse_float(f[5], "increment", lineno),
                default_decrement=parse_float(f[6], "decrement", lineno),
            )
            reg.define(d)
        except StatisticError as exc:
            raise FormatError(str(exc), lineno) from None
        st = reg._stats[d.id]
        st.value = value
        st.update_count = count
    return reg
