import dataclasses
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BSSID, make_trace
from oracles import brute_force_events, random_noiseless_case
from rssimotion import baseline as bl
from rssimotion.core import RssiSample
from rssimotion.detector import (
    DetectorConfig,
    DetectorState,
    Kind,
    Phase,
    Side,
    StreamDetector,
    classify_side,
    detect_trace,
    flush,
    ingest,
    run_trace,
)
from rssimotion.errors import ArmingError, CalibrationError, SequencingError, ValidationError
from rssimotion.fixtures import experiment_fixture
from rssimotion.propagation import ObstructionEvent, PathLossModel, Scenario, simulate

CONFIG = DetectorConfig()


def noiseless(name):
    return simulate(dataclasses.replace(experiment_fixture(name), noise_sigma_db=0.0))


def test_config_defaults():
    c = DetectorConfig()
    assert (c.sustained_threshold_db, c.release_margin_db, c.momentary_threshold_db,
            c.min_sustained_samples, c.side_boundary_db) == (4.0, 2.0, 8.0, 3, 12.0)


@pytest.mark.parametrize("kw", [
    dict(momentary_threshold_db=3.0),
    dict(release_margin_db=4.0),
    dict(release_margin_db=-1.0),
    dict(side_boundary_db=4.0),
    dict(min_sustained_samples=0),
])
def test_config_invariants(kw):
    with pytest.raises(ValidationError):
        DetectorConfig(**kw)


def test_config_from_dict_rejects_unknown():
    with pytest.raises(ValidationError, match="threshold"):
        DetectorConfig.from_dict({"threshold": 3})
    assert DetectorConfig.from_dict({"side_boundary_db": 14}).side_boundary_db == 14


@pytest.mark.parametrize("drop, side", [(15.0, Side.NEAR_AP), (5.0, Side.NEAR_RECEIVER),
                                        (19.0, Side.NEAR_AP), (10.0, Side.NEAR_RECEIVER),
                                        (12.0, Side.NEAR_AP), (11.99, Side.NEAR_RECEIVER)])
def test_classify_side(drop, side):
    assert classify_side(drop, CONFIG) is side


@given(st.floats(0.0, 60.0), st.floats(4.5, 30.0))
def test_classify_side_is_a_threshold(drop, boundary):
    config = DetectorConfig(side_boundary_db=boundary)
    assert (classify_side(drop, config) is Side.NEAR_AP) == (drop >= boundary)


def test_constant_trace_no_events():
    assert detect_trace(make_trace([-50.0] * 400)) == []


def test_fig5_one_sustained_near_ap():
    (ev,) = detect_trace(noiseless("fig5_los_2p5m"))
    assert ev.kind is Kind.SUSTAINED
    assert ev.drop_db == 15.0
    assert ev.side is Side.NEAR_AP
    assert (ev.start_ms, ev.end_ms) == (15_000, 22_750)
    assert ev.baseline_at_start_dbm == -50.0 and ev.min_rssi_dbm == -65.0


def test_fig8_one_momentary_near_receiver():
    (ev,) = detect_trace(noiseless("fig8_fast_crossing"))
    assert ev.kind is Kind.MOMENTARY
    assert ev.drop_db == 11.0
    assert ev.side is Side.NEAR_RECEIVER
    assert ev.start_ms == ev.end_ms == 20_000


def test_fig7_two_sustained():
    events = detect_trace(noiseless("fig7_two_people"))
    assert [e.drop_db for e in events] == [9.0, 11.0]
    assert all(e.kind is Kind.SUSTAINED for e in events)


def test_fig10_four_crossings():
    events = detect_trace(noiseless("fig10_wall_repeated"))
    assert [(e.drop_db, e.side) for e in events] == [
        (10.0, Side.NEAR_RECEIVER), (19.0, Side.NEAR_AP), (10.0, Side.NEAR_RECEIVER), (19.0, Side.NEAR_AP)]


def test_trace_above_threshold_is_quiet():
    values = [-50.0, -53.9, -52.0, -53.5, -51.0] * 40
    assert detect_trace(make_trace(values)) == []


def test_sustained_needs_three_samples():
    short = [-50.0] * 40 + [-56.0] * 2 + [-50.0] * 10
    assert detect_trace(make_trace(short)) == []
    longer = [-50.0] * 40 + [-56.0] * 3 + [-50.0] * 10
    (ev,) = detect_trace(make_trace(longer))
    assert ev.kind is Kind.SUSTAINED and ev.start_ms == 40 * 250 and ev.end_ms == 42 * 250


def test_momentary_back_dates_to_run_start():
    values = [-50.0] * 40 + [-55.0, -59.0] + [-50.0] * 5
    (ev,) = detect_trace(make_trace(values))
    assert (ev.start_ms, ev.end_ms) == (40 * 250, 41 * 250)
    assert ev.kind is Kind.MOMENTARY
    # obstructed level is the median of -55 and -59
    assert ev.drop_db == pytest.approx(7.0)


def test_event_open_at_end_is_flushed():
    (ev,) = detect_trace(make_trace([-50.0] * 40 + [-60.0] * 5))
    assert ev.end_ms == 44 * 250


def test_hysteresis_single_event():
    eps = 0.01
    values = [-50.0] * 40 + [-54.0] * 3
    values += [-54.0, -52.0 - eps] * 50
    values += [-50.0] * 5
    events = detect_trace(make_trace(values))
    assert len(events) == 1
    assert events[0].drop_db == pytest.approx(4.0)


def test_release_below_margin_closes():
    values = [-50.0] * 40 + [-54.0] * 3 + [-51.99] + [-54.0] * 3 + [-50.0]
    assert len(detect_trace(make_trace(values))) == 2


def _armed():
    trace = make_trace([-50.0] * 12)
    return bl.calibrate(trace, 12), DetectorState(last_timestamp_ms=trace[-1].timestamp_ms, bssid=BSSID)


def test_ingest_state_transitions():
    b, state = _armed()
    state, b, ev = ingest(state, b, RssiSample(3_000, BSSID, -50.0))
    assert state.phase is Phase.CLEAR and ev is None
    state, b, ev = ingest(state, b, RssiSample(3_250, BSSID, -62.0))
    assert state.phase is Phase.OBSTRUCTED and b.frozen and state.open_event is not None
    state, b, ev = ingest(state, b, RssiSample(3_500, BSSID, -50.0))
    assert state.phase is Phase.CLEAR and not b.frozen and state.open_event is None
    assert ev.drop_db == 12.0 and ev.side is Side.NEAR_AP and ev.kind is Kind.MOMENTARY


def test_ingest_rejects_out_of_order():
    b, state = _armed()
    with pytest.raises(SequencingError):
        ingest(state, b, RssiSample(1_000, BSSID, -50.0))


def test_ingest_requires_armed_baseline():
    b = bl.calibrate(make_trace([-50.0] * 5), 5)
    with pytest.raises(ArmingError):
        ingest(DetectorState(), b, RssiSample(10_000, BSSID, -50.0))


def test_flush_without_event():
    assert flush(DetectorState(phase=Phase.CLEAR)) is None


def test_short_trace_calibration_error():
    with pytest.raises(CalibrationError, match="12"):
        detect_trace(make_trace([-50.0] * 11))


def test_multi_bssid_partitioned_and_sorted():
    a = make_trace([-50.0] * 40 + [-65.0] * 4 + [-50.0] * 20, bssid="aa:bb:cc:00:00:01")
    b = make_trace([-40.0] * 45 + [-60.0] * 4 + [-40.0] * 30, bssid="aa:bb:cc:00:00:02", start_ms=125)
    merged = sorted(a + b, key=lambda s: s.timestamp_ms)
    events = detect_trace(merged)
    assert [e.bssid for e in events] == ["aa:bb:cc:00:00:01", "aa:bb:cc:00:00:02"]
    assert detect_trace(merged, max_workers=4) == events


def test_plot_trail_marks_event_samples():
    trace = make_trace([-50.0] * 40 + [-60.0] * 4 + [-50.0] * 4)
    _, steps = run_trace(trace)
    flags = [st.event_open for st in steps[BSSID]]
    assert len(flags) == len(trace)
    assert flags == [False] * 40 + [True] * 4 + [False] * 4


def test_stream_detector_matches_batch():
    trace = noiseless("fig10_wall_repeated")
    det = StreamDetector()
    events = [ev for s in trace if (ev := det.feed(s)) is not None]
    tail = det.close()
    if tail:
        events.append(tail)
    assert events == detect_trace(trace)


@pytest.mark.parametrize("seed", range(60))
def test_oracle_equivalence_sample(seed):
    case = random_noiseless_case(seed)
    trace = simulate(case.scenario)
    oracle = brute_force_events([s.timestamp_ms for s in trace], [s.rssi_dbm for s in trace], case.clear_dbm)
    got = [(e.start_ms, e.end_ms, e.kind.value) for e in detect_trace(trace)]
    assert got == oracle


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 20), st.integers(1, 20), st.floats(3.0, 25.0), st.floats(0.0, 10.0))
def test_deepening_never_removes_or_shrinks(start, length, loss, extra):
    def events(l):
        sc = Scenario("02:00:00:00:00:01", 3.0, PathLossModel(-45.0), noise_sigma_db=0.0,
                      duration_ms=30_000,
                      obstructions=(ObstructionEvent((40 + start) * 250, (40 + start + length) * 250, l),))
        return detect_trace(simulate(sc))

    shallow, deep = events(loss), events(loss + extra)
    assert len(deep) >= len(shallow)
    for a, b in zip(shallow, deep):
        assert b.drop_db >= a.drop_db


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-30.0, 5.0), min_size=1, max_size=200))
def test_every_event_meets_threshold(deltas):
    events = detect_trace(make_trace([-50.0] * 40 + [-50.0 + d for d in deltas]))
    for e in events:
        assert e.drop_db >= CONFIG.sustained_threshold_db
        assert e.start_ms <= e.end_ms
        n = (e.end_ms - e.start_ms) // 250 + 1
        assert (e.kind is Kind.MOMENTARY) == (n < CONFIG.min_sustained_samples)


def test_million_constant_samples_no_events():
    samples = [RssiSample(i * 250, BSSID, -50.0) for i in range(1_000_000)]
    t0 = time.perf_counter()
    assert detect_trace(samples) == []
    assert time.perf_counter() - t0 < 60
