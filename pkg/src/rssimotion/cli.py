"""Command line entry point: ``rssimotion <subcommand> ...``.

Exit codes: 0 success, 1 validation or parse error, 2 I/O error. Diagnostics
go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from rssimotion import baseline as bl
from rssimotion.detector import DetectorConfig, run_trace
from rssimotion.errors import RssiMotionError
from rssimotion.fixtures import FIXTURE_IDS, experiment_fixture
from rssimotion.mapping import DEFAULT_CELL_SIZE_M, build_map, render_map
from rssimotion.propagation import scenario_to_dict, simulate
from rssimotion.traceio import (
    format_event,
    format_plot_data,
    load_config,
    load_manifest,
    load_model,
    load_scenario,
    read_trace,
    write_events,
    write_trace,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


def _cmd_simulate(args) -> int:
    scenario = experiment_fixture(args.fixture) if args.fixture else load_scenario(args.scenario)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.sigma is not None:
        changes["noise_sigma_db"] = args.sigma
    if changes:
        scenario = dataclasses.replace(scenario, **changes)
    write_trace(simulate(scenario), args.out, args.format)
    return EXIT_OK


def _cmd_fixtures(args) -> int:
    if args.dump:
        json.dump(scenario_to_dict(experiment_fixture(args.dump)), sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        for name in FIXTURE_IDS:
            print(name)
    return EXIT_OK


def _by_bssid(samples):
    groups = {}
    for s in samples:
        groups.setdefault(s.bssid, []).append(s)
    return groups


def _cmd_calibrate(args) -> int:
    samples = read_trace(args.trace, args.format)
    print("bssid,level_dbm,spread_db,window")
    for bssid, group in sorted(_by_bssid(samples).items()):
        b = bl.calibrate(group[:args.window], args.window)
        print(f"{bssid},{b.level_dbm:.2f},{b.spread_db:.2f},{b.window_len}")
    return EXIT_OK


def _cmd_detect(args) -> int:
    config = load_config(args.config) if args.config else DetectorConfig()
    samples = read_trace(args.trace, args.format)
    events, steps = run_trace(samples, config, max_workers=args.workers)
    if args.out:
        write_events(events, args.out)
    else:
        for e in events:
            print(format_event(e))
    if args.plot_data:
        merged = sorted((st for trail in steps.values() for st in trail),
                        key=lambda st: (st.sample.timestamp_ms, st.sample.bssid))
        Path(args.plot_data).write_text(format_plot_data(merged), encoding="utf-8")
    print(f"{len(events)} event(s) from {len(samples)} sample(s)", file=sys.stderr)
    return EXIT_OK


def _cmd_map(args) -> int:
    model = load_model(args.model)
    points = load_manifest(args.manifest)
    amap = build_map(points, model, args.cell_size)
    Path(f"{args.out}.csv").write_bytes(render_map(amap, "csv"))
    Path(f"{args.out}.pgm").write_bytes(render_map(amap, "pgm"))
    return EXIT_OK


def _cmd_convert(args) -> int:
    samples = read_trace(args.input, args.from_format)
    write_trace(samples, args.output, args.to_format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rssimotion", description="Passive motion detection from Wi-Fi RSSI traces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic trace")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="scenario JSON file")
    src.add_argument("--fixture", choices=FIXTURE_IDS, help="built-in experiment fixture")
    p.add_argument("--out", required=True, help="output trace (.csv or .jsonl)")
    p.add_argument("--seed", type=int, help="noise seed (default: the scenario's own, 0 for fixtures)")
    p.add_argument("--sigma", type=float, help="override noise std-dev in dB")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fixtures", help="list fixture ids or dump one as scenario JSON")
    p.add_argument("--dump", choices=FIXTURE_IDS)
    p.set_defaults(func=_cmd_fixtures)

    p = sub.add_parser("calibrate", help="print per-BSSID baseline level and spread")
    p.add_argument("--trace", required=True)
    p.add_argument("--window", type=int, default=bl.DEFAULT_WINDOW)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("detect", help="detect obstruction events in a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--config", help="detector config JSON")
    p.add_argument("--out", help="events JSONL (default: stdout)")
    p.add_argument("--plot-data", help="write timestamp_ms,rssi_dbm,baseline_dbm,event_open CSV")
    p.add_argument("--workers", type=int, default=None, help="detect BSSIDs in parallel")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("map", help="build an excess-attenuation map from a sweep manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True, help="path-loss model JSON")
    p.add_argument("--out", required=True, help="output prefix; writes <prefix>.csv and <prefix>.pgm")
    p.add_argument("--cell-size", type=float, default=DEFAULT_CELL_SIZE_M)
    p.set_defaults(func=_cmd_map)

    p = sub.add_parser("convert", help="convert traces between csv and jsonl")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--from", dest="from_format", choices=("csv", "jsonl"))
    p.add_argument("--to", dest="to_format", choices=("csv", "jsonl"))
    p.set_defaults(func=_cmd_convert)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are validation errors
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except RssiMotionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
