import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_trace
from rssimotion import baseline as bl
from rssimotion.errors import CalibrationError, SequencingError

rssi_values = st.floats(-100.0, 0.0, allow_nan=False)


def test_constant_window():
    b = bl.calibrate(make_trace([-50.0] * 5), 5)
    assert b.level_dbm == -50.0
    assert b.spread_db == 0.0
    assert not b.frozen


def test_outlier_does_not_move_median():
    assert bl.calibrate(make_trace([-50, -49, -51, -50, -65]), 5).level_dbm == -50.0


def test_spread_is_scaled_mad():
    values = [-50, -49, -51, -50, -65]
    b = bl.calibrate(make_trace(values), 5)
    # deviations from -50: 0 1 1 0 15 -> median 1
    assert b.spread_db == pytest.approx(1.4826)


def test_calibrate_uses_last_window():
    b = bl.calibrate(make_trace([-80, -80, -50, -50, -50]), 3)
    assert b.level_dbm == -50.0
    assert b.window_len == 3


def test_calibration_needs_enough_samples():
    with pytest.raises(CalibrationError, match="at least 5"):
        bl.calibrate(make_trace([-50] * 4), 5)
    with pytest.raises(CalibrationError):
        bl.calibrate(make_trace([-50] * 4), 2)


def test_calibration_single_bssid():
    trace = make_trace([-50] * 3) + make_trace([-50] * 3, bssid="aa:bb:cc:00:11:33", start_ms=10_000)
    with pytest.raises(CalibrationError, match="single BSSID"):
        bl.calibrate(trace, 3)


def test_armed_after_twelve_samples():
    assert not bl.calibrate(make_trace([-50] * 11), 11).armed
    assert bl.calibrate(make_trace([-50] * 12), 12).armed


def test_update_fixed_point():
    trace = make_trace([-50.0] * 41)
    b = bl.update(bl.calibrate(trace[:40], 40), trace[40])
    assert (b.level_dbm, b.spread_db, b.window_len) == (-50.0, 0.0, 40)


def test_single_outlier_in_window_of_eleven():
    trace = make_trace([-50.0] * 11 + [-70.0])
    b = bl.update(bl.calibrate(trace[:11], 11), trace[11])
    assert b.level_dbm == -50.0


def test_window_grows_to_capacity_then_slides():
    trace = make_trace([-50.0] * 12 + [-40.0] * 40)
    b = bl.calibrate(trace[:12], 12, capacity=20)
    for s in trace[12:]:
        b = bl.update(b, s)
        assert b.window_len <= 20
    assert b.window_len == 20
    assert b.level_dbm == -40.0


def test_frozen_update_only_bookkeeping():
    trace = make_trace([-50.0] * 12 + [-90.0])
    b = bl.calibrate(trace[:12], 12).freeze()
    after = bl.update(b, trace[12])
    assert after.level_dbm == -50.0
    assert after.window == b.window
    assert after.last_timestamp_ms == trace[12].timestamp_ms


def test_out_of_order_update():
    trace = make_trace([-50.0] * 12)
    b = bl.calibrate(trace, 12)
    with pytest.raises(SequencingError):
        bl.update(b, trace[5])


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_median_robust_to_minority_contamination(data):
    w = data.draw(st.integers(1, 20)) * 2 + 1
    values = data.draw(st.lists(rssi_values, min_size=w, max_size=w))
    k = data.draw(st.integers(0, (w - 1) // 2))
    idx = data.draw(st.lists(st.integers(0, w - 1), min_size=k, max_size=k, unique=True))
    junk = data.draw(st.lists(st.floats(-200.0, 50.0), min_size=k, max_size=k))
    contaminated = list(values)
    for i, v in zip(idx, junk):
        contaminated[i] = v
    untouched = [v for i, v in enumerate(values) if i not in idx]
    level = bl.calibrate(make_trace(contaminated), w).level_dbm
    assert min(untouched) <= level <= max(untouched)


@settings(max_examples=100, deadline=None)
@given(st.lists(rssi_values, min_size=3, max_size=60), st.lists(rssi_values, max_size=60),
       st.integers(3, 50))
def test_level_bounded_by_window(calib, stream, capacity):
    b = bl.calibrate(make_trace(calib), len(calib), capacity=capacity)
    for s in make_trace(stream, start_ms=10**6):
        b = bl.update(b, s)
        assert min(b.window) <= b.level_dbm <= max(b.window)
        assert b.level_dbm == statistics.median(b.window)
        assert b.spread_db >= 0


@settings(max_examples=100, deadline=None)
@given(st.lists(rssi_values, min_size=12, max_size=40), st.lists(rssi_values, max_size=80))
def test_frozen_level_constant(calib, stream):
    b = bl.calibrate(make_trace(calib), len(calib)).freeze()
    level = b.level_dbm
    for s in make_trace(stream, start_ms=10**6):
        b = bl.update(b, s)
        assert b.level_dbm == level


def test_constant_trace_agreement():
    b = bl.calibrate(make_trace([-63.25] * 40), 40)
    for s in make_trace([-63.25] * 100, start_ms=10**6):
        b = bl.update(b, s)
    assert b.level_dbm == -63.25 and b.spread_db == 0.0
