"""Fixed-memory kernel: exact running mean, flags, memory and agreement
with the reference pipeline."""
import ctypes

import numpy as np
import pytest

from kernel_helpers import differential, retained_kernel_allocations
from tempclust import kernel
from tempclust.core import Cluster, DensityPrototype, EventLog, Mode, bin_events
from tempclust.datagen import builtin_profile, gen_log
from tempclust.errors import RolloverError
from tempclust.tca import ThresholdParams, cluster_fixed, tca


def day_with(counts: dict[int, int]) -> list[float]:
    return sorted(10 * b + 0.5 + k * 0.01 for b, c in counts.items() for k in range(c))


def test_first_day_is_its_own_mean():
    st = kernel.new_state()
    kernel.kernel_ingest_day(st, day_with({60: 2}))
    assert st.bins[60] == 16 and st.day_count == 1


def test_mean_of_two_days():
    st = kernel.state_from_days([day_with({60: 2}), day_with({60: 1})])
    assert st.bins[60] == 12


def test_thirty_days_track_exact_mean():
    log = gen_log(builtin_profile("CS"), 30, seed=30)
    st = kernel.state_from_days(log.days)
    exact = bin_events(log, 10).bins * kernel.SCALE
    assert np.max(np.abs(np.array(st.bins[:]) - exact)) <= 1.0
    assert np.allclose(kernel.kernel_densities(st), bin_events(log, 10).bins, atol=1e-12)


def carry_free_drift(log) -> float:
    """Largest gap between the plain rounded running mean (no remainder
    kept) and the exact scaled mean."""
    bins = np.zeros(144, dtype=int)
    for dc, day in enumerate(log.days):
        counts = np.bincount((np.asarray(day) // 10).astype(int), minlength=144)
        bins = np.floor((bins * dc + 8 * counts) / (dc + 1) + 0.5).astype(int)
    return float(np.max(np.abs(bins - bin_events(log, 10).bins * 8)))


def test_carry_free_running_mean_drifts():
    # why the state keeps a remainder per bin
    worst = max(carry_free_drift(gen_log(builtin_profile("CS"), 30, seed=s)) for s in range(10))
    assert worst > 1.0


def test_all_zero_state_is_empty():
    st = kernel.state_from_days([[]])
    assert kernel.kernel_tca(st, Mode.COMFORT) & kernel.EMPTY
    assert kernel.kernel_clusters(st) == []


def test_no_data_rejected():
    with pytest.raises(ValueError):
        kernel.kernel_tca(kernel.new_state(), Mode.COMFORT)


def test_eco_tie_is_excluded_and_flagged():
    # 288 events over 144 bins: bin 140 holds exactly the mean of 2
    counts = {b: 4 for b in range(71)} | {100: 1, 101: 1, 140: 2}
    st = kernel.state_from_days([day_with(counts)])
    flags = kernel.kernel_tca(st, Mode.ECO)
    assert flags == kernel.ROUNDING_BOUNDARY
    assert kernel.kernel_clusters(st) == [Cluster(0, 70)]


def test_balance_tie_is_excluded_and_flagged():
    # 64 bins at 1 and 64 at 2: mu = 4/3, sigma = 2/3, so mu - sigma/2 = 1
    counts = {b: 1 for b in range(0, 128, 2)} | {b: 2 for b in range(1, 128, 2)}
    st = kernel.state_from_days([day_with(counts)])
    flags = kernel.kernel_tca(st, Mode.BALANCE)
    assert flags == kernel.ROUNDING_BOUNDARY
    # only the count-2 bins count as populated
    only_twos = np.zeros(144)
    only_twos[1:128:2] = 2.0
    expected = cluster_fixed(DensityPrototype(10, only_twos), ThresholdParams(st.ell, 1.0))
    assert kernel.kernel_clusters(st) == expected


def test_saturation_flag():
    st = kernel.state_from_days([day_with({3: 40})])
    assert st.flags & kernel.SATURATED
    assert st.bins[3] == 255


def test_rollover():
    st = kernel.new_state()
    st.day_count = 255
    with pytest.raises(RolloverError):
        kernel.kernel_ingest_day(st, [])


def test_unsorted_day_rejected():
    with pytest.raises(ValueError):
        kernel.kernel_ingest_day(kernel.new_state(), [500.0, 20.0])


def test_state_size_is_static():
    assert kernel.STATE_BYTES == ctypes.sizeof(kernel.KernelState) == 336
    assert kernel.STATE_BYTES <= 512


def test_reset_clears_everything():
    st = kernel.state_from_days([day_with({3: 40})])
    kernel.kernel_reset(st)
    assert bytes(st) == bytes(kernel.STATE_BYTES)


def test_no_retained_allocations():
    log = gen_log(builtin_profile("CS"), 3, seed=1)
    assert retained_kernel_allocations(log.days) == 0


@pytest.mark.parametrize("mode", list(Mode))
def test_two_cs_days_match_reference(mode):
    log = gen_log(builtin_profile("CS"), 2, seed=8)
    st = kernel.state_from_days(log.days)
    kernel.kernel_tca(st, mode)
    assert kernel.kernel_clusters(st) == tca(log, 10, mode)


def test_dense_log_has_more_than_sixteen_clusters():
    # the reason the output is a membership mask rather than a 16-slot buffer
    rng = np.random.default_rng(149)
    n, days = int(rng.integers(60, 101)), int(rng.integers(3, 6))
    log = [np.sort(np.floor(rng.uniform(0, 1440, n) * 100) / 100) for _ in range(days)]
    st = kernel.state_from_days(log)
    kernel.kernel_tca(st, Mode.COMFORT)
    clusters = kernel.kernel_clusters(st)
    assert len(clusters) > 16
    assert clusters == tca(EventLog.from_days(log), 10, Mode.COMFORT)


def test_differential_small():
    runs, diverged, unflagged = differential(range(60))
    assert unflagged == 0
    assert diverged <= 0.01 * runs + 1


def test_describe_flags():
    assert kernel.describe_flags(kernel.SATURATED | kernel.EMPTY) == ["saturated", "empty"]
