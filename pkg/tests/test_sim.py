"""Evaluation, cross-validation, the threshold sweep and memory figures."""
import math

import numpy as np
import pytest

from tempclust.baselines import IntervalSchedule, conventional
from tempclust.core import EventLog, Mode, bin_events
from tempclust.errors import InsufficientDataError
from tempclust.sim import (
    PowerModel,
    conventional_algorithm,
    cross_validate,
    dstar_sweep,
    dump_reports_csv,
    dump_sweep_csv,
    em_algorithm,
    evaluate,
    folds,
    kmeans_algorithm,
    memory_estimate,
    tca_algorithm,
)
from tempclust.tca import select_threshold


def test_conventional_evaluation():
    ev = evaluate(conventional(), [1.0, 500.0, 1439.0])
    assert ev.error_rate == 0.0 and ev.on_hours == 24.0
    assert ev.energy == pytest.approx(14.64)


def test_half_covered():
    ev = evaluate(IntervalSchedule(((600, 660),)), [605, 900])
    assert ev.error_rate == 0.5 and ev.on_hours == 1.0


def test_empty_day_flagged():
    ev = evaluate(IntervalSchedule(((600, 660),)), [])
    assert ev.error_rate == 0.0 and ev.empty_day


def test_empty_schedule_misses_everything():
    ev = evaluate(IntervalSchedule(), [3.0])
    assert ev.error_rate == 1.0 and ev.on_hours == 0.0


def membership_oracle(intervals, day):
    missed = 0
    for t in day:
        if not any(a <= t < b for a, b in intervals):
            missed += 1
    return missed / len(day) if day else 0.0


def test_matches_membership_oracle():
    rng = np.random.default_rng(17)
    for _ in range(100):
        cuts = np.sort(rng.choice(np.arange(0, 1441, 5), size=2 * int(rng.integers(0, 6)), replace=False))
        intervals = [(float(a), float(b)) for a, b in zip(cuts[::2], cuts[1::2])]
        day = sorted(rng.uniform(0, 1440, size=int(rng.integers(0, 80))).tolist())
        day += [a for a, _ in intervals[:1]] + [b for _, b in intervals[:1] if b < 1440]
        day.sort()
        sched = IntervalSchedule(tuple(intervals))
        ev = evaluate(sched, day)
        assert ev.error_rate == membership_oracle(intervals, day)
        assert ev.on_hours == pytest.approx(sum(b - a for a, b in intervals) / 60)
        assert ev.energy == PowerModel().rate * ev.on_hours


def test_lead_time_adds_on_time_only():
    sched = IntervalSchedule(((600, 660),))
    ev = evaluate(sched, [595.0], lead_time=10)
    assert ev.error_rate == 1.0
    assert ev.on_hours == pytest.approx(70 / 60)


def test_power_rate_must_be_positive():
    with pytest.raises(ValueError):
        PowerModel(0.0)


@pytest.mark.parametrize("d", [3, 4, 5, 6, 7])
def test_fold_count(d):
    assert len(folds(d)) == math.comb(d, 2) * (d - 2)


def test_folds_unordered_and_disjoint():
    for train, test in folds(5):
        assert train == tuple(sorted(train)) and test not in train


def test_insufficient_days():
    with pytest.raises(InsufficientDataError):
        cross_validate(EventLog.from_days([[1.0], [2.0]]), conventional_algorithm())


def test_thirty_folds_on_fixture(cs_log):
    cv = cross_validate(cs_log, tca_algorithm(), dataset="CS")
    assert len(cv.reports) == 30
    assert all(0 <= r.error_rate <= 1 and r.on_hours <= 24 for r in cv.reports)


def test_tca_saves_energy_on_cs(cs_log):
    ratio = cross_validate(cs_log, tca_algorithm()).mean_energy / cross_validate(cs_log, conventional_algorithm()).mean_energy
    assert 0.45 <= ratio <= 0.95


@pytest.mark.xfail(
    strict=True,
    reason="synthetic CS nights are quieter than the unpublished real data; TCA/Conventional is about 0.57, below 0.60",
)
def test_tca_conventional_ratio_in_reference_band(cs_log):
    ratio = cross_validate(cs_log, tca_algorithm()).mean_energy / cross_validate(cs_log, conventional_algorithm()).mean_energy
    assert 0.60 <= ratio <= 1.00


def test_conventional_zero_error(cs_log, rs_log):
    for log in (cs_log, rs_log):
        assert all(r.error_rate == 0.0 for r in cross_validate(log, conventional_algorithm()).reports)


def test_kmeans_and_em_run(cs_log):
    for alg in (kmeans_algorithm(), em_algorithm()):
        cv = cross_validate(cs_log, alg)
        assert 0 < cv.mean_on_hours < 24


def test_reports_csv(cs_log):
    text = dump_reports_csv(cross_validate(cs_log, conventional_algorithm(), dataset="CS").reports)
    lines = text.splitlines()
    assert lines[0] == "algorithm,dataset,train_days,test_day,error_rate,on_hours,energy,memory_bytes"
    assert lines[1] == "Conventional,CS,0;1,2,0.000000,24.000000,14.640000,n/a"
    assert len(lines) == 31


# --- memory ---------------------------------------------------------------------


def test_memory_estimates():
    assert memory_estimate("TCA") <= 512
    assert memory_estimate("K-Means") == 2900
    assert memory_estimate("EM") == 2900
    assert memory_estimate("Conventional") is None
    with pytest.raises(KeyError):
        memory_estimate("svm")


# --- threshold sweep --------------------------------------------------------------


@pytest.fixture(scope="module")
def cs_sweep(cs_log):
    return dstar_sweep(cs_log, 10, steps=10)


def test_sweep_starts_at_comfort(cs_log, cs_sweep):
    comfort = cross_validate(cs_log, tca_algorithm(Mode.COMFORT))
    first = cs_sweep.points[0]
    assert first.d_star == 0.0
    assert first.mean_error == comfort.mean_error and first.mean_energy == comfort.mean_energy


def test_sweep_modes_annotated(cs_log, cs_sweep):
    proto = bin_events(cs_log, 10)
    assert cs_sweep.modes == {m: select_threshold(m, proto) for m in Mode}
    assert cs_sweep.points[-1].d_star == pytest.approx(cs_sweep.mu)


@pytest.mark.parametrize("name", ["cs_log", "rs_log"])
def test_sweep_monotone_past_mu(name, request):
    log = request.getfixturevalue(name)
    sweep = dstar_sweep(log, 10, steps=16, d_max=2.0)
    hours = [p.mean_on_hours for p in sweep.points]
    train = [p.mean_train_error for p in sweep.points]
    assert all(b <= a + 1e-12 for a, b in zip(hours, hours[1:]))
    assert all(b >= a - 1e-12 for a, b in zip(train, train[1:]))
    assert hours[-1] < hours[0]


def test_sweep_csv(cs_sweep):
    lines = dump_sweep_csv(cs_sweep).splitlines()
    assert lines[0] == "d_star,mean_error,mean_energy"
    assert len(lines) == 12


def test_two_day_prototypes_leave_modes_degenerate(cs_log, rs_log):
    # with two training days every non-empty bin holds at least 0.5, while
    # about 60 events a day give a mean below 0.5, so Eco keeps every event bin
    for log in (cs_log, rs_log):
        for train, _ in folds(log.num_days):
            proto = bin_events(log.subset(train), 10)
            nonzero = proto.bins[proto.bins > 0]
            assert nonzero.min() >= 0.5 > select_threshold(Mode.ECO, proto)


@pytest.mark.xfail(
    strict=True,
    reason="with two-day training and about 60 events a day, mu < 0.5 <= every non-empty bin, so all modes coincide",
)
def test_cs_modes_strictly_ordered(cs_log):
    energy = {m: cross_validate(cs_log, tca_algorithm(m)).mean_energy for m in Mode}
    assert energy[Mode.ECO] < energy[Mode.BALANCE] < energy[Mode.COMFORT]


def test_modes_weakly_ordered(cs_log, rs_log):
    for log in (cs_log, rs_log):
        hours = {m: cross_validate(log, tca_algorithm(m)).mean_on_hours for m in Mode}
        assert hours[Mode.ECO] <= hours[Mode.BALANCE] <= hours[Mode.COMFORT]


def test_kernel_engine_matches_reference_on_fixture(cs_log):
    ref = cross_validate(cs_log, tca_algorithm(engine="reference"))
    ker = cross_validate(cs_log, tca_algorithm(engine="kernel"))
    assert [r.on_hours for r in ref.reports] == [r.on_hours for r in ker.reports]
