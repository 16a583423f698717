"""Live sample sources.

A source is any iterable of :class:`RssiSample`. Exhausting the iterator
signals end of stream; a source that cannot continue raises
:class:`SourceFailure` with a reason. Timestamps must not decrease per BSSID.
Recorded traces replay through :class:`ReplaySource`, and any scanner that
can report ``(bssid, rssi)`` readings on demand plugs in via
:class:`PollingSource`.
"""

from __future__ import annotations

import time
from typing import Callable, Iterable, Iterator, Sequence

from rssimotion.core import RssiSample
from rssimotion.detector import DetectorConfig, MotionEvent, StreamDetector
from rssimotion.errors import RssiMotionError, SequencingError, SourceFailure


class ReplaySource:
    """Replay a recorded trace, optionally paced in (scaled) real time."""

    def __init__(self, samples: Sequence[RssiSample], realtime: bool = False, speed: float = 1.0,
                 sleep: Callable[[float], None] = time.sleep):
        self.samples = list(samples)
        self.realtime = realtime
        self.speed = speed
        self._sleep = sleep

    def __iter__(self) -> Iterator[RssiSample]:
        prev = None
        for s in self.samples:
            if self.realtime and prev is not None and s.timestamp_ms > prev:
                self._sleep((s.timestamp_ms - prev) / 1000.0 / self.speed)
            prev = s.timestamp_ms
            yield s


class PollingSource:
    """Turn a polling scanner into a sample stream.

    ``poll()`` returns the current ``(bssid, rssi_dbm)`` readings. Each poll is
    stamped with milliseconds elapsed since the first poll according to
    ``clock`` (seconds). ``max_polls=None`` polls until the scanner raises.
    """

    def __init__(self, poll: Callable[[], Iterable[tuple[str, float]]], period_ms: int = 250,
                 max_polls: int | None = None, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.poll = poll
        self.period_ms = period_ms
        self.max_polls = max_polls
        self._clock = clock
        self._sleep = sleep

    def __iter__(self) -> Iterator[RssiSample]:
        epoch = self._clock()
        last_ts = -1
        polls = 0
        while self.max_polls is None or polls < self.max_polls:
            try:
                readings = list(self.poll())
            except Exception as exc:  # noqa: BLE001 - any scanner fault ends the stream
                raise SourceFailure(f"scanner poll failed: {exc}") from exc
            ts = max(int(round((self._clock() - epoch) * 1000)), last_ts + 1)
            last_ts = ts
            for bssid, rssi in readings:
                try:
                    yield RssiSample(ts, bssid, rssi)
                except RssiMotionError as exc:
                    raise SourceFailure(f"scanner returned a bad reading: {exc}") from exc
            polls += 1
            self._sleep(self.period_ms / 1000.0)


def checked(source: Iterable[RssiSample]) -> Iterator[RssiSample]:
    """Enforce the source contract.

    Repeated timestamps for a BSSID (a scanner re-reporting a cached scan) are
    dropped; decreasing timestamps raise :class:`SequencingError`.
    """
    last: dict[str, int] = {}
    for s in source:
        prev = last.get(s.bssid)
        if prev is not None:
            if s.timestamp_ms < prev:
                raise SequencingError(
                    f"source went back in time for {s.bssid}: {s.timestamp_ms} ms after {prev} ms",
                    previous_ms=prev, current_ms=s.timestamp_ms,
                )
            if s.timestamp_ms == prev:
                continue
        last[s.bssid] = s.timestamp_ms
        yield s


def detect_stream(source: Iterable[RssiSample],
                  config: DetectorConfig = DetectorConfig()) -> Iterator[MotionEvent]:
    """Run one streaming detector per BSSID and yield events as they close.

    Events still open at end of stream are yielded last, ordered by start.
    """
    detectors: dict[str, StreamDetector] = {}
    for s in checked(source):
        det = detectors.get(s.bssid)
        if det is None:
            det = detectors[s.bssid] = StreamDetector(config)
        event = det.feed(s)
        if event is not None:
            yield event
    tail = [ev for det in detectors.values() if (ev := det.close()) is not None]
    yield from sorted(tail, key=lambda e: (e.start_ms, e.bssid))
