"""Fixed-memory temporal clustering for a small microcontroller.

All working memory lives in one :class:`KernelState` structure whose size is
a static constant (``ctypes.sizeof``). Operations only read and write its
fields; they create no containers. Loop indexes count as CPU registers.

Densities are kept as exact rationals: for bin ``i`` the scaled event sum
``8 * total_count_i`` equals ``bins[i] * day_count + carry[i]``, where
``bins[i]`` is the scaled mean rounded half up and ``carry[i]`` the signed
remainder. The carry is what keeps the running mean from drifting, and it
makes every threshold comparison an exact integer test.

Clusters are returned as a 144-bit membership mask. Two clusters are always
separated by at least one unpopulated bin, so runs of set bits decode back
to the cluster list without loss and the output can never overflow.
"""
from __future__ import annotations

import ctypes
from typing import Iterable, Sequence

from .core import MINUTES_PER_DAY, Cluster, Mode
from .errors import RolloverError

NBINS = 144
PERIOD = MINUTES_PER_DAY // NBINS
SCALE = 8
MASK_BYTES = NBINS // 8

# flags
SATURATED = 0x01
ROUNDING_BOUNDARY = 0x02
EMPTY = 0x08

_MODE_CODE = {Mode.COMFORT: 0, Mode.BALANCE: 1, Mode.ECO: 2}


class KernelState(ctypes.Structure):
    """Working memory.

    ``sum_x`` and ``spread`` hold the density threshold in exact form:
    ``sum_x = sum(x)`` and ``spread = N * sum(x**2) - sum_x**2`` over the
    scaled sums ``x``. ``mask`` holds populated bits during the sweep and
    cluster membership afterwards. The small scalars are the percolation
    registers.
    """

    _fields_ = [
        ("spread", ctypes.c_uint64),
        ("sum_x", ctypes.c_uint32),
        ("ell", ctypes.c_uint16),
        ("critical_ell", ctypes.c_uint16),
        ("bins", ctypes.c_uint8 * NBINS),
        ("carry", ctypes.c_int8 * NBINS),
        ("mask", ctypes.c_uint8 * MASK_BYTES),
        ("day_count", ctypes.c_uint8),
        ("flags", ctypes.c_uint8),
        ("mode", ctypes.c_uint8),
        ("largest", ctypes.c_uint8),
        ("second", ctypes.c_uint8),
        ("prev_largest", ctypes.c_uint8),
        ("prev_second", ctypes.c_uint8),
        ("best_jump", ctypes.c_uint8),
        ("giant_start", ctypes.c_uint8),
        ("giant_end", ctypes.c_uint8),
    ]


STATE_BYTES = ctypes.sizeof(KernelState)


def kernel_reset(state: KernelState) -> None:
    ctypes.memset(ctypes.addressof(state), 0, STATE_BYTES)


def _scaled_sum(state: KernelState, i: int) -> int:
    return state.bins[i] * state.day_count + state.carry[i]


def kernel_ingest_day(state: KernelState, day: Sequence[float]) -> KernelState:
    """Merge one day's sorted event minutes into the running mean.

    ``day`` is read once, front to back, through a single cursor.
    """
    dc = state.day_count
    if dc >= 255:
        raise RolloverError("day counter full; reset or halve the state")
    n_events = len(day)
    j = 0
    den = dc + 1
    for i in range(NBINS):
        count = 0
        limit = (i + 1) * PERIOD
        while j < n_events and day[j] < limit:
            if day[j] < i * PERIOD:
                raise ValueError("day events must be sorted and non-negative")
            count += 1
            j += 1
        if state.flags & SATURATED and state.bins[i] == 255:
            continue
        x = state.bins[i] * dc + state.carry[i] + SCALE * count
        b = (2 * x + den) // (2 * den)
        if b > 255:
            state.flags |= SATURATED
            state.bins[i] = 255
            state.carry[i] = 0
        else:
            state.bins[i] = b
            state.carry[i] = x - b * den
    if j < n_events:
        raise ValueError(f"event minute {day[j]} outside the day")
    state.day_count = den
    return state


def _load_threshold(state: KernelState, mode: Mode) -> None:
    s1 = s2 = 0
    for i in range(NBINS):
        x = _scaled_sum(state, i)
        s1 += x
        s2 += x * x
    state.mode = _MODE_CODE[mode]
    state.sum_x = s1
    state.spread = NBINS * s2 - s1 * s1


def _populated(state: KernelState, i: int) -> bool:
    """Exact ``D_i > D*`` on the scaled sums; marks exact ties."""
    x = _scaled_sum(state, i)
    if x <= 0:
        return False
    if state.mode == 0:
        return True
    lhs = NBINS * x - state.sum_x  # N * (x - mean)
    if state.mode == 2:
        if lhs == 0:
            state.flags |= ROUNDING_BOUNDARY
        return lhs > 0
    # balance: x > mean - std/2  <=>  2 * N * (mean - x) < sqrt(spread)
    if lhs > 0:
        return True
    gap = -2 * lhs
    if gap * gap == state.spread:
        state.flags |= ROUNDING_BOUNDARY
    return gap * gap < state.spread


def _bit(state: KernelState, i: int) -> int:
    return (state.mask[i >> 3] >> (i & 7)) & 1


def _scan(state: KernelState, reach: int, lo: int, hi: int, fill: bool) -> int:
    """One agglomeration pass over the populated bits of bins ``lo..hi``.

    Leaves the two largest cluster sizes in ``largest``/``second`` and the
    earliest largest cluster in ``giant_start``/``giant_end``. With ``fill``
    every closed cluster is also filled in the mask behind the cursor, which
    turns populated bits into membership bits. Returns the cluster count.
    """
    state.largest = 0
    state.second = 0
    mask = state.mask
    count = 0
    start = last = -1
    for i in range(lo, hi + 2):
        if i <= hi:
            if not (mask[i >> 3] >> (i & 7)) & 1:
                continue
            if start < 0:
                start = last = i
                continue
            if i - last <= reach:
                last = i
                continue
        if start < 0:
            break
        size = last - start + 1
        if size > state.largest:
            state.second = state.largest
            state.largest = size
            state.giant_start = start
            state.giant_end = last
        elif size > state.second:
            state.second = size
        if fill:
            for k in range(start, last + 1):
                mask[k >> 3] |= 1 << (k & 7)
        count += 1
        start = last = i
    return count


def kernel_tca(state: KernelState, mode: Mode | str) -> int:
    """Percolation sweep and final clustering; returns the flags.

    On return ``mask`` marks the bins inside clusters. ``EMPTY`` means no
    bin was populated and the mask is clear.
    """
    if state.day_count < 1:
        raise ValueError("kernel has no data yet")
    mode = Mode.parse(mode)
    state.flags &= SATURATED
    _load_threshold(state, mode)
    any_populated = 0
    for byte in range(MASK_BYTES):
        bits = 0
        for b in range(8):
            if _populated(state, 8 * byte + b):
                bits |= 1 << b
        state.mask[byte] = bits
        any_populated |= bits
    if not any_populated:
        state.flags |= EMPTY
        return state.flags

    state.best_jump = 0
    state.critical_ell = PERIOD
    state.prev_largest = 0
    state.prev_second = 0
    state.ell = PERIOD
    while state.ell <= MINUTES_PER_DAY:
        reach = state.ell // PERIOD
        _scan(state, reach, 0, NBINS - 1, False)
        jump = state.largest - state.prev_largest
        if state.ell > PERIOD and jump > state.best_jump:
            largest, second = state.largest, state.second
            # the giant's pieces one step earlier; their top two must be the
            # previous step's top two
            _scan(state, reach - 1, state.giant_start, state.giant_end, False)
            if state.largest == state.prev_largest and state.second == state.prev_second and state.second > 0:
                state.best_jump = jump
                state.critical_ell = state.ell
            state.largest, state.second = largest, second
        state.prev_largest = state.largest
        state.prev_second = state.second
        state.ell += PERIOD

    state.ell = max(PERIOD, state.critical_ell - PERIOD)
    _scan(state, state.ell // PERIOD, 0, NBINS - 1, True)
    return state.flags


# --- host-side helpers (not part of the device loop) -------------------------


def new_state() -> KernelState:
    return KernelState()


def kernel_clusters(state: KernelState) -> list[Cluster]:
    """Decode the membership mask into clusters (runs of set bits)."""
    clusters = []
    start = -1
    for i in range(NBINS + 1):
        on = i < NBINS and _bit(state, i)
        if on and start < 0:
            start = i
        elif not on and start >= 0:
            clusters.append(Cluster(start, i - 1))
            start = -1
    return clusters


def kernel_densities(state: KernelState) -> list[float]:
    """De-scaled exact per-bin means."""
    dc = state.day_count
    if dc == 0:
        return [0.0] * NBINS
    return [_scaled_sum(state, i) / (SCALE * dc) for i in range(NBINS)]


def state_from_days(days: Iterable[Sequence[float]]) -> KernelState:
    state = new_state()
    for day in days:
        kernel_ingest_day(state, day)
    return state


def describe_flags(flags: int) -> list[str]:
    names = []
    for bit, name in ((SATURATED, "saturated"), (ROUNDING_BOUNDARY, "rounding-boundary"), (EMPTY, "empty")):
        if flags & bit:
            names.append(name)
    return names
