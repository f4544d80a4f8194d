"""Temporal clustering: density threshold by mode, fixed-reach agglomeration
and the percolation sweep that picks the reach.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .core import MINUTES_PER_DAY, Cluster, DensityPrototype, EventLog, Mode, bin_events
from .errors import EmptySystemError


class VisitCounter:
    """Counts bin visits; pass one in to instrument the scans."""

    def __init__(self) -> None:
        self.visits = 0

    def __iadd__(self, n: int) -> VisitCounter:
        self.visits += n
        return self


@dataclass(frozen=True)
class ThresholdParams:
    """Reach ``ell`` (minutes) and density threshold ``d_star``."""

    ell: int
    d_star: float

    def check(self, period: int) -> None:
        if self.ell < period or self.ell % period:
            raise ValueError(f"ell={self.ell} must be a positive multiple of period {period}")
        if not self.d_star >= 0:
            raise ValueError(f"d_star must be non-negative, got {self.d_star}")


@dataclass(frozen=True)
class PercolationStep:
    ell: int
    largest: int
    second_largest: int
    cluster_count: int
    merged_top_two: bool = False


@dataclass(frozen=True)
class PercolationTrace:
    steps: tuple[PercolationStep, ...]
    critical_ell: int
    selected_ell: int
    period: int
    d_star: float

    @property
    def omega(self) -> int:
        """Number of reach increments the sweep evaluated."""
        return len(self.steps)

    def jumps(self) -> list[int]:
        sizes = [s.largest for s in self.steps]
        return [0] + [b - a for a, b in zip(sizes, sizes[1:])]


def select_threshold(mode: Mode, proto: DensityPrototype) -> float:
    """Density threshold for a mode.

    Comfort keeps every bin with any events, Eco keeps bins above the mean,
    Balance sits half a (population) standard deviation below the mean.
    """
    mode = Mode.parse(mode)
    if mode is Mode.COMFORT:
        return 0.0
    mu = float(np.mean(proto.bins))
    if mode is Mode.ECO:
        return mu
    sigma = float(np.std(proto.bins))
    return max(0.0, mu - sigma / 2.0)


def populated(proto: DensityPrototype, d_star: float) -> np.ndarray:
    return proto.bins > d_star


def cluster_fixed(
    proto: DensityPrototype,
    params: ThresholdParams,
    counter: VisitCounter | None = None,
) -> list[Cluster]:
    """Agglomerate populated bins left to right.

    A cluster keeps absorbing the next populated bin while it starts no more
    than ``ell`` minutes after the last absorbed one; the first bin out of
    reach closes it and opens the next.
    """
    params.check(proto.period)
    reach = params.ell // proto.period
    clusters: list[Cluster] = []
    start = last = -1
    d_star = params.d_star
    for i, density in enumerate(proto.bins.tolist()):
        if density <= d_star:
            continue
        if start < 0:
            start = i
        elif i - last > reach:
            clusters.append(Cluster(start, last))
            start = i
        last = i
    if counter is not None:
        counter += proto.n
    if start >= 0:
        clusters.append(Cluster(start, last))
    return clusters


def _giant(clusters: list[Cluster]) -> tuple[Cluster | None, int, int]:
    """Earliest cluster of maximal size, plus the two largest sizes."""
    giant = None
    first = second = 0
    for c in clusters:
        s = c.size
        if s > first:
            giant = c
            first, second = s, first
        elif s > second:
            second = s
    return giant, first, second


def absorbs_top_two(giant: Cluster, previous: list[Cluster]) -> bool:
    """True if ``giant`` swallowed the two largest clusters of ``previous``.

    Sizes are compared rather than identities so ties stay well defined.
    """
    _, first, second = _giant(previous)
    inside = sorted(
        (c.size for c in previous if giant.start_bin <= c.start_bin and c.end_bin <= giant.end_bin),
        reverse=True,
    )
    return len(inside) >= 2 and inside[0] == first and inside[1] == second


def percolation_sweep(
    proto: DensityPrototype,
    d_star: float,
    counter: VisitCounter | None = None,
) -> PercolationTrace:
    """Sweep the reach from one period to a whole day.

    The critical reach is the step where the largest cluster swallows the
    second largest with the biggest growth in size (earliest on ties). The
    selected reach is one period before it. With no such step (a single
    cluster throughout) both fall back to one period.
    """
    period = proto.period
    if not np.any(populated(proto, d_star)):
        raise EmptySystemError(f"no bin has density above {d_star}")
    steps = []
    best_jump = 0
    critical = period
    previous: list[Cluster] = []
    prev_largest = 0
    for ell in range(period, MINUTES_PER_DAY + 1, period):
        clusters = cluster_fixed(proto, ThresholdParams(ell, d_star), counter)
        giant, largest, second = _giant(clusters)
        merged = bool(previous) and absorbs_top_two(giant, previous)
        steps.append(PercolationStep(ell, largest, second, len(clusters), merged))
        if merged and largest - prev_largest > best_jump:
            best_jump = largest - prev_largest
            critical = ell
        previous, prev_largest = clusters, largest
    selected = max(period, critical - period)
    return PercolationTrace(tuple(steps), critical, selected, period, d_star)


@dataclass(frozen=True)
class TCAResult:
    prototype: DensityPrototype
    mode: Mode
    d_star: float
    trace: PercolationTrace | None
    clusters: list[Cluster] = field(default_factory=list)


def run_tca(
    log: EventLog,
    period: int = 10,
    mode: Mode | str = Mode.COMFORT,
    d_star: float | None = None,
) -> TCAResult:
    """Full pipeline with every intermediate kept.

    ``d_star`` overrides the mode's threshold (used by the threshold sweep).
    Raises :class:`EmptySystemError` when nothing is populated.
    """
    mode = Mode.parse(mode)
    proto = bin_events(log, period)
    if d_star is None:
        d_star = select_threshold(mode, proto)
    trace = percolation_sweep(proto, d_star)
    clusters = cluster_fixed(proto, ThresholdParams(trace.selected_ell, d_star))
    return TCAResult(proto, mode, d_star, trace, clusters)


def tca(log: EventLog, period: int = 10, mode: Mode | str = Mode.COMFORT) -> list[Cluster]:
    return run_tca(log, period, mode).clusters


def dump_clusters_csv(clusters: list[Cluster], period: int) -> str:
    out = io.StringIO()
    out.write("start_minute,end_minute\n")
    for c in clusters:
        start, end = c.minutes(period)
        out.write(f"{start},{end}\n")
    return out.getvalue()


def dump_trace_csv(trace: PercolationTrace) -> str:
    out = io.StringIO()
    out.write("ell,largest,second_largest,cluster_count\n")
    for s in trace.steps:
        out.write(f"{s.ell},{s.largest},{s.second_largest},{s.cluster_count}\n")
    return out.getvalue()
