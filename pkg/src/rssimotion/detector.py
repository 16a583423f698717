"""Online obstruction detector.

A per-BSSID state machine compares each sample with the rolling baseline.
An event opens when the drop below baseline stays at or above
``sustained_threshold_db`` for ``min_sustained_samples`` consecutive samples,
or immediately when one sample drops by ``momentary_threshold_db``. The event
start is back-dated to the first sample of the below-threshold run. It closes
once the drop recovers below ``sustained_threshold_db - release_margin_db``.
The baseline is frozen while an event is open.
"""

from __future__ import annotations

import enum
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Iterable, Sequence

from rssimotion import baseline as bl
from rssimotion.baseline import Baseline
from rssimotion.core import RssiSample
from rssimotion.errors import ArmingError, CalibrationError, SequencingError, ValidationError


class Kind(str, enum.Enum):
    MOMENTARY = "momentary"
    SUSTAINED = "sustained"


class Side(str, enum.Enum):
    NEAR_AP = "near_ap"
    NEAR_RECEIVER = "near_receiver"
    UNKNOWN = "unknown"


class Phase(str, enum.Enum):
    CALIBRATING = "calibrating"
    CLEAR = "clear"
    OBSTRUCTED = "obstructed"


@dataclass(frozen=True)
class DetectorConfig:
    sustained_threshold_db: float = 4.0
    release_margin_db: float = 2.0
    momentary_threshold_db: float = 8.0
    min_sustained_samples: int = 3
    side_boundary_db: float = 12.0
    baseline_window: int = bl.DEFAULT_WINDOW

    def __post_init__(self) -> None:
        problems = []
        if not all(math.isfinite(v) for v in (self.sustained_threshold_db, self.release_margin_db,
                                                self.momentary_threshold_db, self.side_boundary_db)):
            problems.append("thresholds must be finite")
        if not self.momentary_threshold_db >= self.sustained_threshold_db:
            problems.append("momentary_threshold_db must be >= sustained_threshold_db")
        if not self.sustained_threshold_db > self.release_margin_db:
            problems.append("sustained_threshold_db must be > release_margin_db")
        if not self.release_margin_db >= 0:
            problems.append("release_margin_db must be >= 0")
        if not self.side_boundary_db > self.sustained_threshold_db:
            problems.append("side_boundary_db must be > sustained_threshold_db")
        if not (isinstance(self.min_sustained_samples, int) and self.min_sustained_samples >= 1):
            problems.append("min_sustained_samples must be a positive integer")
        if not (isinstance(self.baseline_window, int) and self.baseline_window >= bl.MIN_CALIBRATION_SAMPLES):
            problems.append(f"baseline_window must be an integer >= {bl.MIN_CALIBRATION_SAMPLES}")
        if problems:
            raise ValidationError(problems)

    @property
    def release_level_db(self) -> float:
        return self.sustained_threshold_db - self.release_margin_db

    @classmethod
    def from_dict(cls, obj) -> DetectorConfig:
        if not isinstance(obj, dict):
            raise ValidationError(f"detector config must be an object, got {type(obj).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ValidationError([f"unknown detector config key {k!r}" for k in unknown])
        for key, value in obj.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"detector config {key!r} must be a number, got {value!r}")
        return cls(**obj)


@dataclass(frozen=True)
class MotionEvent:
    """A completed obstruction interval on one BSSID.

    ``min_rssi_dbm`` is the obstructed level: the median of the event's
    samples that sit at least ``sustained_threshold_db`` below the baseline.
    On a noiseless plateau this is the plateau itself; under noise it avoids
    the downward bias of a raw minimum. ``drop_db`` is measured from
    ``baseline_at_start_dbm``.
    """

    bssid: str
    start_ms: int
    end_ms: int
    min_rssi_dbm: float
    baseline_at_start_dbm: float
    drop_db: float
    kind: Kind
    side: Side

    def to_dict(self) -> dict:
        return {
            "bssid": self.bssid,
            "start_ms": self.start_ms,
            "end_ms": self.end_ms,
            "min_rssi_dbm": self.min_rssi_dbm,
            "baseline_at_start_dbm": self.baseline_at_start_dbm,
            "drop_db": self.drop_db,
            "kind": self.kind.value,
            "side": self.side.value,
        }


@dataclass(frozen=True)
class _OpenEvent:
    start_ms: int
    last_ms: int
    baseline_at_start_dbm: float
    values: tuple[float, ...]


@dataclass(frozen=True)
class DetectorState:
    phase: Phase = Phase.CALIBRATING
    consecutive_below: int = 0
    run_start_ms: int | None = None
    run_values: tuple[float, ...] = ()
    open_event: _OpenEvent | None = None
    last_timestamp_ms: int | None = None
    bssid: str | None = None


def classify_side(drop_db: float, config: DetectorConfig = DetectorConfig()) -> Side:
    """Deeper drops are attributed to an obstruction near the AP."""
    return Side.NEAR_AP if drop_db >= config.side_boundary_db else Side.NEAR_RECEIVER


def _finish(bssid: str, ev: _OpenEvent, config: DetectorConfig) -> MotionEvent:
    base = ev.baseline_at_start_dbm
    marked = [v for v in ev.values if base - v >= config.sustained_threshold_db]
    level = statistics.median(marked)
    drop = base - level
    kind = Kind.MOMENTARY if len(ev.values) < config.min_sustained_samples else Kind.SUSTAINED
    return MotionEvent(bssid, ev.start_ms, ev.last_ms, level, base, drop, kind, classify_side(drop, config))


def ingest(state: DetectorState, baseline: Baseline, sample: RssiSample,
           config: DetectorConfig = DetectorConfig()) -> tuple[DetectorState, Baseline, MotionEvent | None]:
    """Advance the detector by one sample.

    Returns the new state, the new baseline and the event that closed on this
    sample, if any.
    """
    ts = sample.timestamp_ms
    if state.last_timestamp_ms is not None and ts <= state.last_timestamp_ms:
        raise SequencingError(
            f"sample at {ts} ms is not newer than {state.last_timestamp_ms} ms",
            previous_ms=state.last_timestamp_ms, current_ms=ts,
        )
    if state.bssid is not None and sample.bssid != state.bssid:
        raise ValidationError(f"detector for {state.bssid} got a sample for {sample.bssid}")
    if not baseline.armed:
        raise ArmingError(
            f"baseline has {baseline.window_len} samples; at least "
            f"{bl.MIN_CALIBRATION_SAMPLES} are needed before detection"
        )

    rssi = sample.rssi_dbm
    drop = baseline.level_dbm - rssi

    if state.phase is Phase.OBSTRUCTED:
        ev = state.open_event
        if drop < config.release_level_db:
            event = _finish(sample.bssid, ev, config)
            baseline = bl.update(baseline.unfreeze(), sample)
            return DetectorState(Phase.CLEAR, last_timestamp_ms=ts, bssid=sample.bssid), baseline, event
        ev = replace(ev, last_ms=ts, values=ev.values + (rssi,))
        state = replace(state, open_event=ev, last_timestamp_ms=ts)
        return state, bl.update(baseline, sample), None

    if drop >= config.sustained_threshold_db:
        run_start = state.run_start_ms if state.consecutive_below else ts
        run_values = state.run_values + (rssi,)
        count = state.consecutive_below + 1
        if count >= config.min_sustained_samples or drop >= config.momentary_threshold_db:
            ev = _OpenEvent(run_start, ts, baseline.level_dbm, run_values)
            state = DetectorState(Phase.OBSTRUCTED, count, open_event=ev, last_timestamp_ms=ts,
                                  bssid=sample.bssid)
            return state, bl.update(baseline.freeze(), sample), None
        state = DetectorState(Phase.CLEAR, count, run_start, run_values, None, ts, sample.bssid)
        return state, bl.update(baseline, sample), None

    state = DetectorState(Phase.CLEAR, last_timestamp_ms=ts, bssid=sample.bssid)
    return state, bl.update(baseline, sample), None


def flush(state: DetectorState, config: DetectorConfig = DetectorConfig()) -> MotionEvent | None:
    """Close an event still open at end of stream."""
    if state.phase is Phase.OBSTRUCTED:
        return _finish(state.bssid, state.open_event, config)
    return None


@dataclass(frozen=True)
class TraceStep:
    sample: RssiSample
    baseline_dbm: float
    event_open: bool


def _run_one(samples: Sequence[RssiSample], config: DetectorConfig) -> tuple[list[MotionEvent], list[TraceStep]]:
    if len(samples) < bl.MIN_CALIBRATION_SAMPLES:
        raise CalibrationError(
            f"{samples[0].bssid}: trace has {len(samples)} samples, calibration needs "
            f"at least {bl.MIN_CALIBRATION_SAMPLES}"
        )
    n_cal = min(len(samples), config.baseline_window)
    baseline = bl.calibrate(samples[:n_cal], n_cal, capacity=config.baseline_window)
    steps = [TraceStep(s, baseline.level_dbm, False) for s in samples[:n_cal]]
    state = DetectorState(last_timestamp_ms=samples[n_cal - 1].timestamp_ms, bssid=samples[0].bssid)
    events = []
    for sample in samples[n_cal:]:
        state, baseline, event = ingest(state, baseline, sample, config)
        if event is not None:
            events.append(event)
        steps.append(TraceStep(sample, baseline.level_dbm, False))
    tail = flush(state, config)
    if tail is not None:
        events.append(tail)
    if events:
        # mark every sample inside an emitted event, including back-dated run samples
        i = 0
        for k, step in enumerate(steps):
            ts = step.sample.timestamp_ms
            while i < len(events) and events[i].end_ms < ts:
                i += 1
            if i < len(events) and events[i].start_ms <= ts:
                steps[k] = replace(step, event_open=True)
    return events, steps


def _partition(samples: Iterable[RssiSample]) -> dict[str, list[RssiSample]]:
    groups: dict[str, list[RssiSample]] = {}
    for s in samples:
        groups.setdefault(s.bssid, []).append(s)
    return groups


def run_trace(samples: Iterable[RssiSample], config: DetectorConfig = DetectorConfig(),
              max_workers: int | None = None) -> tuple[list[MotionEvent], dict[str, list[TraceStep]]]:
    """Run one detector per BSSID over a recorded trace.

    Returns the events in deterministic ``(start_ms, bssid)`` order and the
    per-sample baseline/event trail for every BSSID.
    """
    groups = _partition(samples)
    if not groups:
        raise CalibrationError(f"empty trace; calibration needs at least {bl.MIN_CALIBRATION_SAMPLES} samples")
    if max_workers and max_workers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = dict(zip(groups, pool.map(lambda g: _run_one(g, config), groups.values())))
    else:
        results = {bssid: _run_one(g, config) for bssid, g in groups.items()}
    events = [ev for evs, _ in results.values() for ev in evs]
    events.sort(key=lambda e: (e.start_ms, e.bssid, e.end_ms))
    return events, {bssid: steps for bssid, (_, steps) in results.items()}


def detect_trace(samples: Iterable[RssiSample], config: DetectorConfig = DetectorConfig(),
                 max_workers: int | None = None) -> list[MotionEvent]:
    return run_trace(samples, config, max_workers)[0]


class StreamDetector:
    """Streaming wrapper for one BSSID, calibration included.

    The first ``config.baseline_window`` samples calibrate the baseline; after
    that every sample goes through :func:`ingest`.
    """

    def __init__(self, config: DetectorConfig = DetectorConfig()):
        self.config = config
        self.state = DetectorState()
        self.baseline: Baseline | None = None
        self._calibration: list[RssiSample] = []

    @property
    def armed(self) -> bool:
        return self.baseline is not None

    def feed(self, sample: RssiSample) -> MotionEvent | None:
        if self.baseline is None:
            if self._calibration and sample.timestamp_ms <= self._calibration[-1].timestamp_ms:
                raise SequencingError(
                    f"sample at {sample.timestamp_ms} ms is not newer than "
                    f"{self._calibration[-1].timestamp_ms} ms",
                    previous_ms=self._calibration[-1].timestamp_ms, current_ms=sample.timestamp_ms,
                )
            self._calibration.append(sample)
            if len(self._calibration) >= self.config.baseline_window:
                self.baseline = bl.calibrate(self._calibration, len(self._calibration))
                self.state = DetectorState(last_timestamp_ms=sample.timestamp_ms, bssid=sample.bssid)
                self._calibration = []
            return None
        self.state, self.baseline, event = ingest(self.state, self.baseline, sample, self.config)
        return event

    def close(self) -> MotionEvent | None:
        event = flush(self.state, self.config)
        self.state = replace(self.state, phase=Phase.CLEAR, open_event=None,
                             consecutive_below=0, run_start_ms=None, run_values=())
        return event
