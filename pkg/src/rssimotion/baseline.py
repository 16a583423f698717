"""Rolling median baseline of the unobstructed RSSI level.

The level is the median of the most recent samples and the spread is their
median absolute deviation scaled by 1.4826 (a consistent estimator of the
standard deviation for Gaussian noise). A median is used instead of a mean so
the obstructions being detected do not drag the reference down.
"""

from __future__ import annotations

import bisect
import statistics
from dataclasses import dataclass, field, replace
from typing import Sequence

from rssimotion.core import RssiSample
from rssimotion.errors import CalibrationError, SequencingError

MAD_SCALE = 1.4826
DEFAULT_WINDOW = 40
MIN_CALIBRATION_SAMPLES = 12
MIN_WINDOW = 3


def _median_sorted(values: Sequence[float]) -> float:
    n = len(values)
    mid = n // 2
    if n % 2:
        return values[mid]
    return (values[mid - 1] + values[mid]) / 2.0


@dataclass(frozen=True)
class Baseline:
    """Immutable baseline state for one BSSID.

    ``window`` holds the contributing RSSI values oldest first and never grows
    beyond ``capacity``. While ``frozen`` the level ignores new samples.
    """

    level_dbm: float
    window: tuple[float, ...]
    capacity: int
    frozen: bool = False
    last_timestamp_ms: int | None = None
    bssid: str | None = None
    _sorted: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def window_len(self) -> int:
        return len(self.window)

    @property
    def spread_db(self) -> float:
        level = self.level_dbm
        return MAD_SCALE * statistics.median(abs(v - level) for v in self.window)

    @property
    def armed(self) -> bool:
        return self.window_len >= MIN_CALIBRATION_SAMPLES

    @classmethod
    def from_values(cls, values: Sequence[float], capacity: int | None = None, **kwargs) -> Baseline:
        window = tuple(float(v) for v in values)
        if len(window) < MIN_WINDOW:
            raise CalibrationError(f"a baseline needs at least {MIN_WINDOW} samples, got {len(window)}")
        ordered = tuple(sorted(window))
        return cls(_median_sorted(ordered), window, capacity or len(window), _sorted=ordered, **kwargs)

    def freeze(self) -> Baseline:
        return self if self.frozen else replace(self, frozen=True)

    def unfreeze(self) -> Baseline:
        return replace(self, frozen=False) if self.frozen else self


def calibrate(samples: Sequence[RssiSample], window: int = DEFAULT_WINDOW,
              capacity: int | None = None) -> Baseline:
    """Estimate the baseline from the last ``window`` samples of a clear trace.

    ``capacity`` sets how many samples the rolling window keeps afterwards and
    defaults to ``window``.
    """
    if window < MIN_WINDOW:
        raise CalibrationError(f"calibration window must be >= {MIN_WINDOW}, got {window}")
    if len(samples) < window:
        raise CalibrationError(f"calibration needs at least {window} samples, got {len(samples)}")
    bssids = {s.bssid for s in samples}
    if len(bssids) > 1:
        raise CalibrationError(f"calibration expects a single BSSID, got {sorted(bssids)}")
    for prev, cur in zip(samples, samples[1:]):
        if cur.timestamp_ms <= prev.timestamp_ms:
            raise SequencingError(
                f"calibration samples out of order: {cur.timestamp_ms} after {prev.timestamp_ms}",
                previous_ms=prev.timestamp_ms, current_ms=cur.timestamp_ms,
            )
    tail = samples[-window:]
    return Baseline.from_values(
        [s.rssi_dbm for s in tail],
        capacity=max(capacity or window, window),
        last_timestamp_ms=samples[-1].timestamp_ms,
        bssid=samples[0].bssid,
    )


def update(baseline: Baseline, sample: RssiSample) -> Baseline:
    """Fold one newer sample into the baseline (no-op on the level while frozen)."""
    last = baseline.last_timestamp_ms
    if last is not None and sample.timestamp_ms <= last:
        raise SequencingError(
            f"sample at {sample.timestamp_ms} ms is not newer than {last} ms",
            previous_ms=last, current_ms=sample.timestamp_ms,
        )
    if baseline.frozen:
        return replace(baseline, last_timestamp_ms=sample.timestamp_ms)

    value = sample.rssi_dbm
    window = baseline.window
    ordered = list(baseline._sorted)
    if len(window) >= baseline.capacity:
        oldest = window[0]
        if oldest == value:
            # level and spread are unchanged; only the order shifts
            return Baseline(baseline.level_dbm, window[1:] + (value,), baseline.capacity, False,
                            sample.timestamp_ms, baseline.bssid, baseline._sorted)
        del ordered[bisect.bisect_left(ordered, oldest)]
        window = window[1:]
    bisect.insort(ordered, value)
    return Baseline(_median_sorted(ordered), window + (value,), baseline.capacity, False,
                    sample.timestamp_ms, baseline.bssid, tuple(ordered))
