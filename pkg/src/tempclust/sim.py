"""Evaluation engine: error rate and energy of a schedule, leave-one-out
style cross-validation over day pairs, the density-threshold sweep and the
memory accounting behind the summary tables.
"""
from __future__ import annotations

import io
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernel
from .baselines import (
    IntervalSchedule,
    clusters_to_schedule,
    conventional,
    em_gmm_1d,
    kmeans_1d,
)
from .core import MINUTES_PER_DAY, Day, EventLog, Mode, bin_events
from .errors import EmptySystemError, InsufficientDataError
from .tca import run_tca, select_threshold

logger = logging.getLogger(__name__)

# 24 h at this rate reproduces the 14.64 Wh/day of the always-on reference.
DEFAULT_RATE = 0.61


@dataclass(frozen=True)
class PowerModel:
    rate: float = DEFAULT_RATE
    unit_label: str = "Wh"

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError("power rate must be positive")


@dataclass(frozen=True)
class Evaluation:
    error_rate: float
    energy: float
    on_hours: float
    empty_day: bool = False


def evaluate(
    schedule: IntervalSchedule,
    test_day: Sequence[float],
    power: PowerModel = PowerModel(),
    lead_time: float = 0.0,
) -> Evaluation:
    """Score a schedule against one day of events.

    The error rate is the fraction of events outside every interval; an
    empty day scores 0 and is flagged. ``lead_time`` minutes of pre-cooling
    before each interval add to the on-time but not to coverage.
    """
    events = np.asarray(test_day, dtype=float)
    if events.size and schedule.intervals:
        starts = np.array([a for a, _ in schedule.intervals])
        ends = np.array([b for _, b in schedule.intervals])
        # sorted, disjoint intervals: the only candidate is the last start <= t
        pos = np.searchsorted(starts, events, side="right") - 1
        covered = (pos >= 0) & (events < ends[np.maximum(pos, 0)])
        error = float(np.count_nonzero(~covered)) / events.size
    else:
        error = 1.0 if events.size else 0.0
    if lead_time > 0:
        on = IntervalSchedule.merged((a - lead_time, b) for a, b in schedule.intervals)
    else:
        on = schedule
    on_hours = on.on_minutes / 60.0
    return Evaluation(error, power.rate * on_hours, on_hours, events.size == 0)


@dataclass(frozen=True)
class Algorithm:
    """A named scheduler: fits on training days, returns on-intervals."""

    name: str
    fit: Callable[[EventLog], IntervalSchedule]
    memory_bytes: int | None = None


@dataclass(frozen=True)
class MemoryAssumptions:
    """Worst-case input sizes for the raw-event baselines."""

    events_per_day: int = MINUTES_PER_DAY
    bytes_per_entry: int = 1
    input_vectors: int = 2
    control_bytes: int = 20


def memory_estimate(algorithm: str, assumptions: MemoryAssumptions = MemoryAssumptions()) -> int | None:
    """Working-memory bytes; ``None`` where not applicable (always-on)."""
    key = algorithm.strip().lower().replace("-", "")
    if key.startswith("tca"):
        return kernel.STATE_BYTES
    if key in ("kmeans", "em"):
        a = assumptions
        return a.input_vectors * a.events_per_day * a.bytes_per_entry + a.control_bytes
    if key == "conventional":
        return None
    raise KeyError(algorithm)


def tca_algorithm(
    mode: Mode | str = Mode.COMFORT,
    period: int = 10,
    engine: str = "reference",
    d_star: float | None = None,
    name: str | None = None,
) -> Algorithm:
    mode = Mode.parse(mode)
    if engine not in ("reference", "kernel"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "kernel" and (period != kernel.PERIOD or d_star is not None):
        raise ValueError(f"the kernel runs with period {kernel.PERIOD} and mode thresholds only")

    def fit(train: EventLog) -> IntervalSchedule:
        if engine == "kernel":
            state = kernel.state_from_days(train.days)
            kernel.kernel_tca(state, mode)
            return clusters_to_schedule(kernel.kernel_clusters(state), kernel.PERIOD)
        try:
            result = run_tca(train, period, mode, d_star=d_star)
        except EmptySystemError:
            logger.debug("no populated bins; compressor never scheduled")
            return IntervalSchedule()
        return clusters_to_schedule(result.clusters, period)

    return Algorithm(name or "TCA", fit, memory_estimate("tca"))


def kmeans_algorithm(k: int = 4, period: int = 10) -> Algorithm:
    def fit(train: EventLog) -> IntervalSchedule:
        points = train.pooled()
        if points.size == 0:
            return IntervalSchedule()
        return kmeans_1d(points, k, period)

    return Algorithm("K-Means", fit, memory_estimate("kmeans"))


def em_algorithm(k: int = 4, period: int = 10) -> Algorithm:
    def fit(train: EventLog) -> IntervalSchedule:
        points = train.pooled()
        if points.size < 2:
            return IntervalSchedule()
        k_eff = min(k, points.size // 2)
        if k_eff < k:
            logger.warning("only %d training events; EM k reduced to %d", points.size, k_eff)
        return em_gmm_1d(points, k_eff, period)[1]

    return Algorithm("EM", fit, memory_estimate("em"))


def conventional_algorithm() -> Algorithm:
    return Algorithm("Conventional", lambda train: conventional(), memory_estimate("conventional"))


def algorithm_by_name(name: str, period: int = 10, mode: Mode | str = Mode.COMFORT, engine: str = "reference") -> Algorithm:
    key = name.strip().lower()
    if key == "tca":
        return tca_algorithm(mode, period, engine)
    if key in ("kmeans", "k-means"):
        return kmeans_algorithm(period=period)
    if key == "em":
        return em_algorithm(period=period)
    if key == "conventional":
        return conventional_algorithm()
    raise KeyError(name)


@dataclass(frozen=True)
class EvalReport:
    algorithm: str
    dataset: str
    train_days: tuple[int, ...]
    test_day: int
    error_rate: float
    on_hours: float
    energy: float
    memory_bytes: int | None
    train_error: float = 0.0
    empty_test_day: bool = False


@dataclass
class CVResult:
    reports: list[EvalReport] = field(default_factory=list)

    def _mean(self, attr: str) -> float:
        return float(np.mean([getattr(r, attr) for r in self.reports]))

    @property
    def mean_error(self) -> float:
        return self._mean("error_rate")

    @property
    def mean_energy(self) -> float:
        return self._mean("energy")

    @property
    def mean_on_hours(self) -> float:
        return self._mean("on_hours")

    @property
    def mean_train_error(self) -> float:
        return self._mean("train_error")


def folds(num_days: int, train_size: int = 2) -> list[tuple[tuple[int, ...], int]]:
    """Every unordered training set of ``train_size`` days with each other day as test."""
    if num_days < train_size + 1:
        raise InsufficientDataError(f"cross-validation needs at least {train_size + 1} days, got {num_days}")
    out = []
    for train in itertools.combinations(range(num_days), train_size):
        for test in range(num_days):
            if test not in train:
                out.append((train, test))
    return out


def _error_on(schedule: IntervalSchedule, days: Sequence[Day]) -> float:
    total = sum(len(d) for d in days)
    if total == 0:
        return 0.0
    missed = sum(evaluate(schedule, d).error_rate * len(d) for d in days)
    return missed / total


def cross_validate(
    log: EventLog,
    algorithm: Algorithm,
    power: PowerModel = PowerModel(),
    dataset: str = "",
    train_size: int = 2,
    lead_time: float = 0.0,
) -> CVResult:
    """Fit on every day pair, score on every remaining day.

    A 5-day log gives C(5,2) * 3 = 30 folds. Reports come back in fold
    order (training pair, then test day).
    """
    result = CVResult()
    cache: dict[tuple[int, ...], tuple[IntervalSchedule, float]] = {}
    for train, test in folds(log.num_days, train_size):
        if train not in cache:
            train_log = log.subset(train)
            schedule = algorithm.fit(train_log)
            cache[train] = (schedule, _error_on(schedule, train_log.days))
        schedule, train_error = cache[train]
        ev = evaluate(schedule, log.days[test], power, lead_time)
        result.reports.append(
            EvalReport(
                algorithm.name,
                dataset,
                train,
                test,
                ev.error_rate,
                ev.on_hours,
                ev.energy,
                algorithm.memory_bytes,
                train_error,
                ev.empty_day,
            )
        )
    return result


@dataclass(frozen=True)
class SweepPoint:
    d_star: float
    mean_error: float
    mean_energy: float
    mean_on_hours: float
    mean_train_error: float


@dataclass
class SweepResult:
    points: list[SweepPoint]
    modes: dict[Mode, float]
    mu: float
    sigma: float


def dstar_sweep(
    log: EventLog,
    period: int = 10,
    power: PowerModel = PowerModel(),
    steps: int = 20,
    d_max: float | None = None,
) -> SweepResult:
    """Cross-validated TCA at ``steps + 1`` evenly spaced thresholds in
    ``[0, d_max]``; ``d_max`` defaults to mu. Mu and sigma come from the whole
    log's prototype.

    Folds where nothing is populated schedule no on-time.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if log.num_days < 3:
        raise InsufficientDataError(f"sweep needs at least 3 days, got {log.num_days}")
    proto = bin_events(log, period)
    mu = float(np.mean(proto.bins))
    sigma = float(np.std(proto.bins))
    modes = {m: select_threshold(m, proto) for m in Mode}
    points = []
    for d_star in np.linspace(0.0, mu if d_max is None else d_max, steps + 1):
        cv = cross_validate(log, tca_algorithm(period=period, d_star=float(d_star)), power)
        points.append(SweepPoint(float(d_star), cv.mean_error, cv.mean_energy, cv.mean_on_hours, cv.mean_train_error))
    return SweepResult(points, modes, mu, sigma)


# --- report output -------------------------------------------------------------

REPORT_HEADER = "algorithm,dataset,train_days,test_day,error_rate,on_hours,energy,memory_bytes"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def dump_reports_csv(reports: Sequence[EvalReport]) -> str:
    out = io.StringIO()
    out.write(REPORT_HEADER + "\n")
    for r in reports:
        memory = "n/a" if r.memory_bytes is None else str(r.memory_bytes)
        train = ";".join(str(d) for d in r.train_days)
        out.write(
            f"{r.algorithm},{r.dataset},{train},{r.test_day},{_fmt(r.error_rate)},"
            f"{_fmt(r.on_hours)},{_fmt(r.energy)},{memory}\n"
        )
    return out.getvalue()


def dump_reports_json(reports: Sequence[EvalReport]) -> list[dict]:
    return [
        {
            "algorithm": r.algorithm,
            "dataset": r.dataset,
            "train_days": list(r.train_days),
            "test_day": r.test_day,
            "error_rate": r.error_rate,
            "on_hours": r.on_hours,
            "energy": r.energy,
            "memory_bytes": r.memory_bytes,
        }
        for r in reports
    ]


def dump_sweep_csv(sweep: SweepResult) -> str:
    out = io.StringIO()
    out.write("d_star,mean_error,mean_energy\n")
    for p in sweep.points:
        out.write(f"{_fmt(p.d_star)},{_fmt(p.mean_error)},{_fmt(p.mean_energy)}\n")
    return out.getvalue()


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(header, widths)))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
    return "\n".join(lines) + "\n"


def summary_table(results: dict[tuple[str, str], CVResult], unit: str = "Wh") -> str:
    """Algorithms by rows; memory, then energy and error per dataset."""
    algos = list(dict.fromkeys(a for a, _ in results))
    datasets = list(dict.fromkeys(d for _, d in results))
    header = ["Algorithm", "Memory (B)"]
    header += [f"Energy {d} ({unit})" for d in datasets]
    header += [f"Error {d}" for d in datasets]
    rows = []
    for a in algos:
        first = next(results[(a, d)] for d in datasets if (a, d) in results)
        memory = first.reports[0].memory_bytes if first.reports else None
        row = [a, "-" if memory is None else f"~{memory}"]
        row += [f"{results[(a, d)].mean_energy:.2f}" if (a, d) in results else "" for d in datasets]
        row += [f"{results[(a, d)].mean_error:.2f}" if (a, d) in results else "" for d in datasets]
        rows.append(row)
    return _table(header, rows)


def mode_table(results: dict[tuple[Mode, str], CVResult], unit: str = "Wh") -> str:
    """TCA modes by rows (Eco first); energy and error per dataset."""
    datasets = list(dict.fromkeys(d for _, d in results))
    header = ["Mode"] + [f"Energy {d} ({unit})" for d in datasets] + [f"Error {d}" for d in datasets]
    rows = []
    for m in (Mode.ECO, Mode.BALANCE, Mode.COMFORT):
        if not any((m, d) in results for d in datasets):
            continue
        row = [m.value.capitalize()]
        row += [f"{results[(m, d)].mean_energy:.2f}" if (m, d) in results else "" for d in datasets]
        row += [f"{results[(m, d)].mean_error:.2f}" if (m, d) in results else "" for d in datasets]
        rows.append(row)
    return _table(header, rows)

