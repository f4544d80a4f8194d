"""Domain types and event binning.

An :class:`EventLog` holds raw withdrawal times (minute of day) for a run of
days. :func:`bin_events` folds it into a :class:`DensityPrototype`, the
per-bin mean event count that every clustering step works from.
"""
from __future__ import annotations

import enum
import io
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInputError, InvalidPeriodError, ParseError

MINUTES_PER_DAY = 1440

Day = tuple[float, ...]


class Mode(enum.Enum):
    COMFORT = "comfort"
    BALANCE = "balance"
    ECO = "eco"

    @classmethod
    def parse(cls, name: str | Mode) -> Mode:
        if isinstance(name, Mode):
            return name
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown mode {name!r} (expected one of: {choices})") from None

    def __str__(self) -> str:
        return self.value


def check_period(period: int) -> int:
    if isinstance(period, bool) or not isinstance(period, (int, np.integer)):
        raise InvalidPeriodError(f"period must be an integer number of minutes, got {period!r}")
    period = int(period)
    if period <= 0 or MINUTES_PER_DAY % period:
        raise InvalidPeriodError(f"period {period} does not divide {MINUTES_PER_DAY}")
    return period


@dataclass(frozen=True)
class EventLog:
    """Per-day sorted event minutes in ``[0, 1440)``."""

    days: tuple[Day, ...] = ()

    def __post_init__(self) -> None:
        days = tuple(tuple(float(t) for t in day) for day in self.days)
        for d, day in enumerate(days):
            for j, t in enumerate(day):
                if not (0.0 <= t < MINUTES_PER_DAY):
                    raise ValueError(f"day {d}: event time {t} outside [0, {MINUTES_PER_DAY})")
                if j and t < day[j - 1]:
                    raise ValueError(f"day {d}: events are not sorted")
        object.__setattr__(self, "days", days)

    @classmethod
    def from_days(cls, days: Iterable[Iterable[float]]) -> EventLog:
        """Build a log from unsorted per-day event lists."""
        return cls(tuple(tuple(sorted(float(t) for t in day)) for day in days))

    @property
    def num_days(self) -> int:
        return len(self.days)

    @property
    def total_events(self) -> int:
        return sum(len(day) for day in self.days)

    def subset(self, indexes: Sequence[int]) -> EventLog:
        return EventLog(tuple(self.days[i] for i in indexes))

    def pooled(self) -> np.ndarray:
        """All event minutes of every day in one sorted array."""
        if not self.days:
            return np.empty(0)
        return np.sort(np.concatenate([np.asarray(day, dtype=float) for day in self.days]))

    def __len__(self) -> int:
        return len(self.days)


@dataclass(frozen=True, eq=False)
class DensityPrototype:
    """Mean event count per time bin; ``N = 1440 / period`` bins."""

    period: int
    bins: np.ndarray

    def __post_init__(self) -> None:
        period = check_period(self.period)
        bins = np.array(self.bins, dtype=float)
        if bins.ndim != 1 or bins.size * period != MINUTES_PER_DAY:
            raise ValueError(
                f"expected {MINUTES_PER_DAY // period} bins for period {period}, got shape {bins.shape}"
            )
        if not np.all(np.isfinite(bins)) or np.any(bins < 0):
            raise ValueError("densities must be finite and non-negative")
        bins.flags.writeable = False
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "bins", bins)

    @property
    def n(self) -> int:
        return self.bins.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DensityPrototype):
            return NotImplemented
        return self.period == other.period and np.array_equal(self.bins, other.bins)

    def __hash__(self) -> int:
        return hash((self.period, self.bins.tobytes()))

    def regroup(self, period: int) -> DensityPrototype:
        """Sum adjacent bins into a coarser prototype (``period`` a multiple of ours)."""
        period = check_period(period)
        if period % self.period:
            raise InvalidPeriodError(f"period {period} is not a multiple of {self.period}")
        factor = period // self.period
        return DensityPrototype(period, self.bins.reshape(-1, factor).sum(axis=1))


@dataclass(frozen=True, order=True)
class Cluster:
    """Inclusive bin range ``[start_bin, end_bin]``."""

    start_bin: int
    end_bin: int

    def __post_init__(self) -> None:
        if self.start_bin < 0 or self.end_bin < self.start_bin:
            raise ValueError(f"invalid cluster [{self.start_bin}, {self.end_bin}]")

    @property
    def size(self) -> int:
        return self.end_bin - self.start_bin + 1

    def minutes(self, period: int) -> tuple[int, int]:
        """Half-open minute span ``[start, end)`` covered by the cluster."""
        return self.start_bin * period, (self.end_bin + 1) * period


def bin_events(log: EventLog, period: int = 10) -> DensityPrototype:
    period = check_period(period)
    if log.num_days == 0:
        raise EmptyInputError("event log has no days")
    n = MINUTES_PER_DAY // period
    counts = np.zeros(n, dtype=np.int64)
    for day in log.days:
        if day:
            idx = np.floor(np.asarray(day) / period).astype(np.int64)
            counts += np.bincount(idx, minlength=n)
    return DensityPrototype(period, counts / log.num_days)


# --- event-log text format -------------------------------------------------
#
#   # days: 5
#   0,605.5
#   0,607
#   3,1130
#
# ``day_index`` is 0-based. The optional ``# days: N`` header keeps trailing
# empty days; otherwise the day count is ``max(day_index) + 1``.


def parse_event_log(text: str, source: str | None = None) -> EventLog:
    declared: int | None = None
    events: dict[int, list[float]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().startswith("days:"):
                try:
                    declared = int(body.split(":", 1)[1])
                except ValueError:
                    raise ParseError(f"bad days header {line!r}", lineno, source) from None
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 'day_index,minute_of_day', got {line!r}", lineno, source)
        try:
            day = int(parts[0])
            minute = float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", lineno, source) from None
        if day < 0:
            raise ParseError(f"negative day index {day}", lineno, source)
        if not (0.0 <= minute < MINUTES_PER_DAY) or math.isnan(minute):
            raise ParseError(f"minute {parts[1].strip()} outside [0, {MINUTES_PER_DAY})", lineno, source)
        events.setdefault(day, []).append(minute)
    num_days = max(events) + 1 if events else 0
    if declared is not None:
        if declared < num_days:
            raise ParseError(f"header declares {declared} days but day index {num_days - 1} is present", None, source)
        num_days = declared
    return EventLog.from_days(events.get(d, ()) for d in range(num_days))


def read_event_log(path: str | os.PathLike) -> EventLog:
    with open(path, encoding="utf-8") as fh:
        return parse_event_log(fh.read(), source=str(path))


def format_minute(t: float) -> str:
    return repr(float(t)) if t != int(t) else str(int(t))


def dump_event_log(log: EventLog) -> str:
    out = io.StringIO()
    out.write(f"# days: {log.num_days}\n")
    for d, day in enumerate(log.days):
        for t in day:
            out.write(f"{d},{format_minute(t)}\n")
    return out.getvalue()


def write_event_log(log: EventLog, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_event_log(log))
