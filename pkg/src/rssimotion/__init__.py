"""Passive motion and obstruction detection from Wi-Fi RSSI time series."""

from rssimotion.baseline import Baseline, calibrate, update
from rssimotion.core import RssiSample, dbm_to_mw, mw_to_dbm, parse_bssid
from rssimotion.detector import (
    DetectorConfig,
    DetectorState,
    Kind,
    MotionEvent,
    Side,
    StreamDetector,
    classify_side,
    detect_trace,
    flush,
    ingest,
)
from rssimotion.fixtures import FIXTURE_IDS, experiment_fixture
from rssimotion.mapping import AttenuationMap, SweepPoint, build_map, excess_attenuation, render_map
from rssimotion.propagation import ObstructionEvent, PathLossModel, Scenario, expected_rssi, simulate
from rssimotion.traceio import read_trace, write_trace

__all__ = [
    "AttenuationMap", "Baseline", "DetectorConfig", "DetectorState", "FIXTURE_IDS", "Kind",
    "MotionEvent", "ObstructionEvent", "PathLossModel", "RssiSample", "Scenario", "Side",
    "StreamDetector", "SweepPoint", "build_map", "calibrate", "classify_side", "dbm_to_mw",
    "detect_trace", "excess_attenuation", "expected_rssi", "flush", "ingest", "mw_to_dbm",
    "experiment_fixture", "parse_bssid", "read_trace", "render_map", "simulate", "update", "write_trace",
]
