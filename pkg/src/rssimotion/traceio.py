"""Trace, event and configuration files.

Traces are CSV (header ``timestamp_ms,bssid,rssi_dbm[,channel]``) or JSON
Lines with the same keys. RSSI is written with two decimals. Events are JSON
Lines, one :class:`~rssimotion.detector.MotionEvent` per line.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from rssimotion.core import RssiSample, parse_bssid
from rssimotion.detector import DetectorConfig, Kind, MotionEvent, Side, TraceStep
from rssimotion.errors import (
    DuplicateSampleError,
    ParseError,
    RssiMotionError,
    SequencingError,
    ValidationError,
)
from rssimotion.mapping import SweepPoint
from rssimotion.propagation import (
    PathLossModel,
    Scenario,
    model_from_dict,
    scenario_from_dict,
    scenario_to_dict,
)

TRACE_FORMATS = ("csv", "jsonl")
CSV_HEADER = ("timestamp_ms", "bssid", "rssi_dbm")
CSV_HEADER_WITH_CHANNEL = CSV_HEADER + ("channel",)
PLOT_HEADER = "timestamp_ms,rssi_dbm,baseline_dbm,event_open"
_TRACE_KEYS = set(CSV_HEADER_WITH_CHANNEL)


def trace_format(path: str | Path, fmt: str | None = None) -> str:
    """Resolve an explicit format or infer it from the file extension."""
    if fmt is None:
        fmt = Path(path).suffix.lstrip(".").lower()
    if fmt not in TRACE_FORMATS:
        raise ValidationError(f"unknown trace format {fmt!r} for {str(path)!r}; "
                              f"valid formats: {', '.join(TRACE_FORMATS)}")
    return fmt


def _int_field(text, line: int, name: str) -> int:
    if isinstance(text, bool):
        raise ParseError(f"expected an integer, got {text!r}", line=line, field=name)
    if isinstance(text, int):
        return text
    try:
        return int(str(text).strip())
    except ValueError:
        raise ParseError(f"expected an integer, got {text!r}", line=line, field=name) from None


def _rssi_field(text, line: int) -> float:
    if isinstance(text, bool):
        raise ParseError(f"expected a number, got {text!r}", line=line, field="rssi_dbm")
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"expected a number, got {text!r}", line=line, field="rssi_dbm") from None
    if not math.isfinite(value):
        raise ParseError(f"expected a finite number, got {text!r}", line=line, field="rssi_dbm")
    return value


def _make_sample(line: int, ts, bssid, rssi, channel) -> RssiSample:
    ts = _int_field(ts, line, "timestamp_ms")
    try:
        bssid = parse_bssid(bssid)
    except ParseError as exc:
        raise ParseError(str(exc), line=line, field="bssid") from None
    rssi = _rssi_field(rssi, line)
    if channel is not None and channel != "":
        channel = _int_field(channel, line, "channel")
        if channel <= 0:
            raise ParseError(f"channel must be positive, got {channel}", line=line, field="channel")
    else:
        channel = None
    return RssiSample(ts, bssid, rssi, channel)


def _check_order(records: list[tuple[int, RssiSample]]) -> None:
    last: dict[str, tuple[int, int]] = {}
    for line, s in records:
        prev = last.get(s.bssid)
        if prev is not None:
            prev_ts, prev_line = prev
            if s.timestamp_ms == prev_ts:
                raise DuplicateSampleError(
                    f"line {line}: duplicate sample for {s.bssid} at {s.timestamp_ms} ms "
                    f"(first seen on line {prev_line})",
                    previous_ms=prev_ts, current_ms=s.timestamp_ms,
                )
            if s.timestamp_ms < prev_ts:
                raise SequencingError(
                    f"line {line}: {s.bssid} timestamp {s.timestamp_ms} ms comes after "
                    f"{prev_ts} ms (line {prev_line})",
                    previous_ms=prev_ts, current_ms=s.timestamp_ms,
                )
        last[s.bssid] = (s.timestamp_ms, line)


def _parse_csv(text: str) -> list[tuple[int, RssiSample]]:
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None:
        raise ParseError("empty file; expected header " + ",".join(CSV_HEADER), line=1)
    header = tuple(h.strip() for h in header)
    if header not in (CSV_HEADER, CSV_HEADER_WITH_CHANNEL):
        raise ParseError(f"bad header {','.join(header)!r}; expected "
                         f"{','.join(CSV_HEADER)}[,channel]", line=1)
    records = []
    for line, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=line)
        channel = row[3] if len(row) == 4 else None
        records.append((line, _make_sample(line, row[0], row[1], row[2], channel)))
    return records


def _parse_jsonl(text: str) -> list[tuple[int, RssiSample]]:
    records = []
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=line) from None
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", line=line)
        unknown = sorted(set(obj) - _TRACE_KEYS)
        if unknown:
            raise ParseError(f"unknown key {unknown[0]!r}", line=line, field=unknown[0])
        for key in CSV_HEADER:
            if key not in obj:
                raise ParseError("missing key", line=line, field=key)
        if not isinstance(obj["bssid"], str):
            raise ParseError(f"expected a string, got {obj['bssid']!r}", line=line, field="bssid")
        if isinstance(obj["timestamp_ms"], float):
            raise ParseError(f"expected an integer, got {obj['timestamp_ms']!r}", line=line, field="timestamp_ms")
        records.append((line, _make_sample(line, obj["timestamp_ms"], obj["bssid"],
                                           obj["rssi_dbm"], obj.get("channel"))))
    return records


def parse_trace(text: str, fmt: str) -> list[RssiSample]:
    records = _parse_csv(text) if trace_format("<text>", fmt) == "csv" else _parse_jsonl(text)
    _check_order(records)
    samples = [s for _, s in records]
    samples.sort(key=lambda s: s.timestamp_ms)
    return samples


def read_trace(path: str | Path, fmt: str | None = None) -> list[RssiSample]:
    """Read and validate a trace; samples come back in timestamp order."""
    fmt = trace_format(path, fmt)
    text = Path(path).read_text(encoding="utf-8")
    return parse_trace(text, fmt)


def _canonical_order(samples: Iterable[RssiSample]) -> list[RssiSample]:
    return sorted(samples, key=lambda s: (s.timestamp_ms, s.bssid))


def format_trace(samples: Sequence[RssiSample], fmt: str) -> str:
    ordered = _canonical_order(samples)
    if trace_format("<text>", fmt) == "csv":
        with_channel = any(s.channel is not None for s in ordered)
        lines = [",".join(CSV_HEADER_WITH_CHANNEL if with_channel else CSV_HEADER)]
        for s in ordered:
            row = f"{s.timestamp_ms},{s.bssid},{s.rssi_dbm:.2f}"
            if with_channel:
                row += "," + ("" if s.channel is None else str(s.channel))
            lines.append(row)
        return "\n".join(lines) + "\n"
    lines = []
    for s in ordered:
        row = f'{{"timestamp_ms":{s.timestamp_ms},"bssid":"{s.bssid}","rssi_dbm":{s.rssi_dbm:.2f}'
        if s.channel is not None:
            row += f',"channel":{s.channel}'
        lines.append(row + "}")
    return "".join(line + "\n" for line in lines)


def write_trace(samples: Sequence[RssiSample], path: str | Path, fmt: str | None = None) -> None:
    """Write samples ordered by timestamp, ties broken by ascending BSSID."""
    fmt = trace_format(path, fmt)
    Path(path).write_text(format_trace(samples, fmt), encoding="utf-8")


# events ---------------------------------------------------------------------

def format_event(event: MotionEvent) -> str:
    return (
        f'{{"bssid":"{event.bssid}","start_ms":{event.start_ms},"end_ms":{event.end_ms},'
        f'"min_rssi_dbm":{event.min_rssi_dbm:.2f},'
        f'"baseline_at_start_dbm":{event.baseline_at_start_dbm:.2f},'
        f'"drop_db":{event.drop_db:.2f},"kind":"{event.kind.value}","side":"{event.side.value}"}}'
    )


def write_events(events: Iterable[MotionEvent], path: str | Path) -> None:
    Path(path).write_text("".join(format_event(e) + "\n" for e in events), encoding="utf-8")


def read_events(path: str | Path) -> list[MotionEvent]:
    events = []
    for line, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            events.append(MotionEvent(
                obj["bssid"], obj["start_ms"], obj["end_ms"], obj["min_rssi_dbm"],
                obj["baseline_at_start_dbm"], obj["drop_db"], Kind(obj["kind"]), Side(obj["side"]),
            ))
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"bad event record: {exc}", line=line) from None
    return events


def format_plot_data(steps: Sequence[TraceStep]) -> str:
    lines = [PLOT_HEADER]
    for st in steps:
        lines.append(f"{st.sample.timestamp_ms},{st.sample.rssi_dbm:.2f},"
                     f"{st.baseline_dbm:.2f},{int(st.event_open)}")
    return "\n".join(lines) + "\n"


# JSON configuration ---------------------------------------------------------

def load_json(path: str | Path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc.msg}", line=exc.lineno) from None


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(load_json(path))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> PathLossModel:
    return model_from_dict(load_json(path))


def load_config(path: str | Path) -> DetectorConfig:
    return DetectorConfig.from_dict(load_json(path))


_POINT_KEYS = {"x_m", "y_m", "ap_x_m", "ap_y_m", "trace"}


def load_manifest(path: str | Path) -> list[SweepPoint]:
    """Load a sweep manifest.

    The manifest is ``{"points": [{"x_m", "y_m", "ap_x_m", "ap_y_m", "trace"}, ...]}``
    where ``trace`` is a trace file path relative to the manifest.
    """
    path = Path(path)
    obj = load_json(path)
    if not isinstance(obj, dict) or set(obj) != {"points"} or not isinstance(obj["points"], list):
        raise ValidationError(f"{path}: manifest must be an object with a single 'points' list")
    points = []
    for i, item in enumerate(obj["points"]):
        if not isinstance(item, dict) or set(item) != _POINT_KEYS:
            raise ValidationError(f"{path}: points[{i}] must have exactly the keys "
                                  f"{', '.join(sorted(_POINT_KEYS))}")
        coords = {}
        for key in ("x_m", "y_m", "ap_x_m", "ap_y_m"):
            value = item[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"{path}: points[{i}].{key} must be a finite number")
            coords[key] = float(value)
        trace_path = path.parent / item["trace"]
        try:
            trace = read_trace(trace_path)
        except RssiMotionError as exc:
            raise ValidationError(f"{trace_path}: {exc}") from exc
        points.append(SweepPoint(coords["x_m"], coords["y_m"], tuple(trace), coords["ap_x_m"], coords["ap_y_m"]))
    return points
