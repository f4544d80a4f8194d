"""Binning, domain types and the event-log text format."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempclust.core import (
    Cluster,
    DensityPrototype,
    EventLog,
    Mode,
    bin_events,
    check_period,
    dump_event_log,
    parse_event_log,
    read_event_log,
    write_event_log,
)
from tempclust.datagen import builtin_profile, gen_log
from tempclust.errors import EmptyInputError, InvalidPeriodError, ParseError

minute = st.floats(min_value=0, max_value=1439.99, allow_nan=False)
days_st = st.lists(st.lists(minute, max_size=40), min_size=1, max_size=6)


def histogram_oracle(log: EventLog, period: int) -> list[float]:
    n = 1440 // period
    totals = [0] * n
    for day in log.days:
        for t in day:
            k = 0
            while (k + 1) * period <= t:
                k += 1
            totals[k] += 1
    return [c / log.num_days for c in totals]


def test_single_day_counts():
    proto = bin_events(EventLog.from_days([[605, 607, 1130]]), 10)
    assert proto.bins[60] == 2 and proto.bins[113] == 1
    assert proto.bins.sum() == 3


def test_two_day_mean():
    proto = bin_events(EventLog.from_days([[100], [105]]), 10)
    assert proto.bins[10] == 1.0
    assert np.count_nonzero(proto.bins) == 1


def test_boundary_event_goes_to_upper_bin():
    proto = bin_events(EventLog.from_days([[600.0]]), 10)
    assert proto.bins[60] == 1 and proto.bins[59] == 0


def test_matches_histogram_oracle_on_cs():
    log = gen_log(builtin_profile("CS"), 3, seed=7)
    proto = bin_events(log, 10)
    assert proto.bins.tolist() == pytest.approx(histogram_oracle(log, 10), abs=1e-12)


@pytest.mark.parametrize("period", [7, 0, -10, 1441])
def test_invalid_period(period):
    with pytest.raises(InvalidPeriodError):
        check_period(period)
    with pytest.raises(InvalidPeriodError):
        bin_events(EventLog.from_days([[1.0]]), period)


def test_empty_log():
    with pytest.raises(EmptyInputError):
        bin_events(EventLog(()), 10)


@settings(max_examples=200, deadline=None)
@given(days_st)
def test_conservation(days):
    log = EventLog.from_days(days)
    proto = bin_events(log, 10)
    assert abs(proto.bins.sum() * log.num_days - log.total_events) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(days_st, st.randoms(use_true_random=False))
def test_day_order_invariant(days, rnd):
    shuffled = list(days)
    rnd.shuffle(shuffled)
    assert bin_events(EventLog.from_days(days), 10) == bin_events(EventLog.from_days(shuffled), 10)


@settings(max_examples=100, deadline=None)
@given(days_st)
def test_regroup_from_period_one(days):
    log = EventLog.from_days(days)
    fine = bin_events(log, 1).regroup(10)
    coarse = bin_events(log, 10)
    assert np.allclose(fine.bins, coarse.bins, atol=1e-12)


def test_eventlog_validation():
    with pytest.raises(ValueError):
        EventLog(((5.0, 3.0),))
    with pytest.raises(ValueError):
        EventLog(((1440.0,),))
    assert EventLog(()).num_days == 0


def test_prototype_is_read_only():
    proto = bin_events(EventLog.from_days([[1.0]]), 10)
    with pytest.raises(ValueError):
        proto.bins[0] = 3


def test_prototype_rejects_bad_shape():
    with pytest.raises(ValueError):
        DensityPrototype(10, np.zeros(100))
    with pytest.raises(ValueError):
        DensityPrototype(10, -np.ones(144))


def test_cluster_minutes_and_order():
    c = Cluster(3, 5)
    assert c.size == 3
    assert c.minutes(10) == (30, 60)
    assert sorted([Cluster(7, 8), c]) == [c, Cluster(7, 8)]
    with pytest.raises(ValueError):
        Cluster(5, 3)


def test_mode_parse():
    assert Mode.parse("ECO") is Mode.ECO
    assert Mode.parse(Mode.BALANCE) is Mode.BALANCE
    with pytest.raises(ValueError):
        Mode.parse("turbo")


def test_roundtrip_file(tmp_path):
    log = gen_log(builtin_profile("RS"), 3, seed=3)
    path = tmp_path / "log.csv"
    write_event_log(log, path)
    assert read_event_log(path) == log
    assert dump_event_log(read_event_log(path)) == path.read_text()


def test_trailing_empty_days_survive():
    log = EventLog.from_days([[1.5], [], []])
    assert parse_event_log(dump_event_log(log)).num_days == 3


def test_parse_comments_and_unsorted_lines():
    log = parse_event_log("# a comment\n0,605.5\n0,100\n\n1,3\n")
    assert log.days == ((100.0, 605.5), (3.0,))


@pytest.mark.parametrize(
    "text, line",
    [
        ("0,1\n0,abc\n", 2),
        ("0,1\n# x\n0,1,2\n", 3),
        ("0,1440\n", 1),
        ("-1,5\n", 1),
        ("# days: many\n", 1),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_event_log(text, source="log.csv")
    assert info.value.line == line
    assert f"log.csv:{line}:" in str(info.value)
