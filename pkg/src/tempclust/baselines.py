"""Comparison schedulers: 1D K-Means, 1D Gaussian-mixture EM and the
always-on conventional policy, plus the schedule type they all produce.
"""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from .core import MINUTES_PER_DAY, Cluster
from .errors import SingularityError

log = logging.getLogger(__name__)

VAR_FLOOR = 1.0  # minutes**2


@dataclass(frozen=True)
class IntervalSchedule:
    """Sorted, disjoint half-open ``[start, end)`` minute intervals."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        prev_end = -math.inf
        for a, b in ivs:
            if not (0 <= a < b <= MINUTES_PER_DAY):
                raise ValueError(f"bad interval [{a}, {b})")
            if a < prev_end:
                raise ValueError("intervals overlap or are unsorted")
            prev_end = b
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def merged(cls, intervals: Iterable[tuple[float, float]]) -> IntervalSchedule:
        """Clip to the day, sort and merge overlapping or touching spans."""
        spans = sorted(
            (max(0.0, float(a)), min(float(MINUTES_PER_DAY), float(b))) for a, b in intervals
        )
        out: list[list[float]] = []
        for a, b in spans:
            if b <= a:
                continue
            if out and a <= out[-1][1]:
                out[-1][1] = max(out[-1][1], b)
            else:
                out.append([a, b])
        return cls(tuple((a, b) for a, b in out))

    @property
    def on_minutes(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def covers(self, t: float) -> bool:
        for a, b in self.intervals:
            if a <= t < b:
                return True
            if t < a:
                break
        return False


def clusters_to_schedule(clusters: Sequence[Cluster], period: int) -> IntervalSchedule:
    return IntervalSchedule(tuple(c.minutes(period) for c in clusters))


def snap_to_period(start: float, end: float, period: int) -> tuple[float, float]:
    """Widen ``[start, end]`` outward to whole periods; the end is inclusive."""
    return (math.floor(start / period) * period, (math.floor(end / period) + 1) * period)


def dump_schedule_csv(schedule: IntervalSchedule) -> str:
    out = io.StringIO()
    out.write("start_minute,end_minute\n")
    for a, b in schedule.intervals:
        out.write(f"{a:g},{b:g}\n")
    return out.getvalue()


def conventional() -> IntervalSchedule:
    return IntervalSchedule(((0.0, float(MINUTES_PER_DAY)),))


# --- K-Means -----------------------------------------------------------------


@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    wcss: float
    iterations: int
    k_requested: int
    wcss_history: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.size

    @property
    def reduced(self) -> bool:
        return self.k < self.k_requested


def wcss(points: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum((points - centroids[labels]) ** 2))


def _assign(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return np.argmin(np.abs(points[:, None] - centroids[None, :]), axis=1)


def lloyd(points: np.ndarray, centroids: np.ndarray, max_iter: int = 100) -> KMeansResult:
    """Lloyd iterations from the given centroids.

    An emptied cluster is re-seeded at the point farthest from its current
    centroid. Stops when the assignment no longer changes.
    """
    points = np.asarray(points, dtype=float)
    centroids = np.array(centroids, dtype=float)
    k = centroids.size
    labels = _assign(points, centroids)
    history = [wcss(points, centroids, labels)]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        for j in range(k):
            members = points[labels == j]
            if members.size:
                centroids[j] = members.mean()
            else:
                dist = np.abs(points - centroids[labels])
                far = int(np.argmax(dist))
                centroids[j] = points[far]
                labels[far] = j
        history.append(wcss(points, centroids, labels))
        new_labels = _assign(points, centroids)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        history.append(wcss(points, centroids, labels))
    order = np.argsort(centroids, kind="stable")
    remap = np.empty(k, dtype=int)
    remap[order] = np.arange(k)
    return KMeansResult(centroids[order], remap[labels], wcss(points, centroids, labels), iterations, k, history)


def quantile_init(points: np.ndarray, k: int) -> np.ndarray:
    """Centroid ``j`` at the ``(j + 0.5) / k`` quantile."""
    return np.quantile(points, (np.arange(k) + 0.5) / k)


def plusplus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new centroid drawn with probability
    proportional to its squared distance from the chosen ones."""
    centroids = [points[rng.integers(points.size)]]
    for _ in range(1, k):
        d2 = np.min((points[:, None] - np.array(centroids)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total == 0:
            break
        centroids.append(points[rng.choice(points.size, p=d2 / total)])
    return np.sort(np.array(centroids))


def kmeans_fit(
    points: Sequence[float],
    k: int = 4,
    max_iter: int = 100,
    n_init: int = 10,
    seed: int = 0,
) -> KMeansResult:
    """Best of Lloyd runs from the quantile start and ``n_init`` k-means++
    starts drawn from a fixed seed. The quantile run wins ties, so the
    result is deterministic."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise ValueError("no points to cluster")
    if k < 1:
        raise ValueError("k must be at least 1")
    distinct = np.unique(points).size
    k_eff = min(k, distinct)
    if k_eff < k:
        log.warning("only %d distinct points; reducing k from %d", distinct, k)
    init = quantile_init(points, k_eff)
    if np.unique(init).size < k_eff:
        # heavy ties can collapse quantiles; spread over the distinct values
        uniq = np.unique(points)
        init = uniq[np.round(np.linspace(0, uniq.size - 1, k_eff)).astype(int)]
    best = lloyd(points, init, max_iter)
    rng = np.random.default_rng(seed)
    for _ in range(n_init):
        start = plusplus_init(points, k_eff, rng)
        if np.unique(start).size < k_eff:
            continue
        run = lloyd(points, start, max_iter)
        if run.wcss < best.wcss:
            best = run
    best.k_requested = k
    return best


def kmeans_schedule(result: KMeansResult, points: Sequence[float], period: int = 10) -> IntervalSchedule:
    points = np.asarray(points, dtype=float)
    spans = []
    for j in range(result.k):
        members = points[result.labels == j]
        if members.size:
            spans.append(snap_to_period(members.min(), members.max(), period))
    return IntervalSchedule.merged(spans)


def kmeans_1d(points: Sequence[float], k: int = 4, period: int = 10) -> IntervalSchedule:
    """On-intervals from 1D K-Means: each cluster's ``[min, max]``, widened
    outward to whole periods, overlaps merged."""
    result = kmeans_fit(points, k)
    return kmeans_schedule(result, points, period)


# --- Gaussian mixture EM -----------------------------------------------------


@dataclass
class GmmParams:
    weights: np.ndarray
    means: np.ndarray
    stddevs: np.ndarray
    log_likelihood: float
    iterations: int
    ll_history: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.weights.size


def _log_density(points: np.ndarray, weights, means, variances) -> np.ndarray:
    """Per-point, per-component ``log(w_j * N(x | m_j, v_j))``."""
    diff = points[:, None] - means[None, :]
    return (
        np.log(weights)[None, :]
        - 0.5 * np.log(2 * np.pi * variances)[None, :]
        - 0.5 * diff**2 / variances[None, :]
    )


def em_fit(
    points: Sequence[float],
    k: int = 4,
    tol: float = 1e-6,
    max_iter: int = 200,
) -> GmmParams:
    """Maximum-likelihood 1D Gaussian mixture by EM.

    Starts from the K-Means partition; variances are floored at 1 minute².
    Stops when the log-likelihood gains less than ``tol`` or after
    ``max_iter`` iterations.
    """
    x = np.asarray(points, dtype=float)
    if k < 1:
        raise ValueError("k must be at least 1")
    if x.size < 2 * k:
        raise ValueError(f"EM with k={k} needs at least {2 * k} points, got {x.size}")
    km = kmeans_fit(x, k)
    k = km.k
    weights = np.empty(k)
    means = np.empty(k)
    variances = np.empty(k)
    for j in range(k):
        members = x[km.labels == j]
        weights[j] = members.size / x.size
        means[j] = members.mean()
        variances[j] = max(members.var(), VAR_FLOOR)

    history = []
    ll = -math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        logp = _log_density(x, weights, means, variances)
        norm = logsumexp(logp, axis=1)
        ll_now = float(norm.sum())
        if not math.isfinite(ll_now):
            raise SingularityError("log-likelihood is not finite")
        history.append(ll_now)
        if ll_now - ll < tol:
            ll = ll_now
            break
        ll = ll_now
        resp = np.exp(logp - norm[:, None])
        nk = resp.sum(axis=0)
        # a starved component keeps its parameters but gets a tiny weight
        nk = np.maximum(nk, 1e-300)
        weights = nk / x.size
        weights /= weights.sum()
        means = (resp * x[:, None]).sum(axis=0) / nk
        variances = np.maximum((resp * (x[:, None] - means[None, :]) ** 2).sum(axis=0) / nk, VAR_FLOOR)
    else:
        logp = _log_density(x, weights, means, variances)
        ll = float(logsumexp(logp, axis=1).sum())
        history.append(ll)

    order = np.argsort(means, kind="stable")
    return GmmParams(weights[order], means[order], np.sqrt(variances[order]), ll, iterations, history)


def gmm_schedule(params: GmmParams, period: int = 10, width: float = 2.0) -> IntervalSchedule:
    spans = [
        snap_to_period(max(0.0, m - width * s), min(MINUTES_PER_DAY - 1e-9, m + width * s), period)
        for m, s in zip(params.means, params.stddevs)
    ]
    return IntervalSchedule.merged(spans)


def em_gmm_1d(points: Sequence[float], k: int = 4, period: int = 10) -> tuple[GmmParams, IntervalSchedule]:
    """Fit the mixture and schedule ``mean ± 2σ`` around every component."""
    params = em_fit(points, k)
    return params, gmm_schedule(params, period)
