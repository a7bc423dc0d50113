"""Command-line entry point.

Exit codes: 0 success, 1 validation errors / alignment failure / unfit
clocks, 2 usage or parse failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import (
    DegenerateTimes,
    EmptyOverlap,
    InsufficientAnchors,
    IoFailure,
    MissingLog,
    NoStreams,
    ParseError,
    UnknownProfile,
    UnreadableDir,
)
from .model import Severity, get_profile
from .poseio import serialize_pose_file
from .session import merge_sessions, scan_session, validate_session
from .sync import (
    FitMode,
    clocks_from_json,
    clocks_to_json,
    fit_clock,
    group_anchors,
    read_anchor_csv,
    rebase_clocks,
)
from .synth import Scenario, generate_session
from .timeline import build_timeline

EXIT_OK, EXIT_ERRORS, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _num(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _load(path: str, profile=None):
    try:
        return scan_session(path, profile)
    except (MissingLog, UnreadableDir) as e:
        raise _Exit(EXIT_IO, str(e)) from e
    except ParseError as e:
        raise _Exit(EXIT_USAGE, f"{path}/log.txt: {e}") from e


def _profile(device_id: str | None):
    if device_id is None:
        return None
    try:
        return get_profile(device_id)
    except UnknownProfile as e:
        raise _Exit(EXIT_USAGE, str(e)) from e


def _print_findings(findings, as_json: bool, out) -> None:
    if as_json:
        for f in findings:
            print(json.dumps(f.to_dict(), sort_keys=True), file=out)
        return
    if not findings:
        print("no findings", file=out)
        return
    for f in findings:
        print(f"{f.severity.value:<8} {f.code:<20} {f.stream or '-':<24} {f.message}", file=out)


def cmd_scan(args, out) -> int:
    session = _load(args.dir)
    if not args.json:
        print(f"session {session.session_id} ({session.log.dialect.value} log)", file=out)
        print(f"{'file':<16} {'role':<6} {'frames':>7} {'first_ms':>14} {'last_ms':>14} "
              f"{'dur_ms':>7} {'fps':>7} {'mp4':>7}", file=out)
        for s in session.streams:
            fps = s.effective_fps
            meta = session.mp4_meta.get(s.file_name)
            samples = "/".join(str(t.sample_count) for t in meta.tracks) if meta else "-"
            print(f"{s.file_name:<16} {s.role.value:<6} {s.total_frames:>7} {s.first_ts_ms:>14} "
                  f"{s.last_ts_ms:>14} {s.duration_ms:>7} {fps if fps is None else round(fps, 2)!s:>7} "
                  f"{samples:>7}", file=out)
        if session.pose_track is not None:
            print(f"poses: {len(session.pose_track)} samples", file=out)
    _print_findings(session.scan_findings, args.json, out)
    return EXIT_ERRORS if any(f.severity is Severity.ERROR for f in session.scan_findings) else EXIT_OK


def cmd_validate(args, out) -> int:
    profile = _profile(args.profile)
    session = _load(args.dir, profile)
    report = validate_session(session, profile, fps_tolerance=args.fps_tolerance)
    _print_findings(report.findings, args.json, out)
    return EXIT_ERRORS if report.has_errors else EXIT_OK


def cmd_sync(args, out) -> int:
    try:
        anchors = read_anchor_csv(args.anchors)
    except OSError as e:
        raise _Exit(EXIT_IO, f"cannot read {args.anchors}: {e}") from e
    except ParseError as e:
        raise _Exit(EXIT_USAGE, f"{args.anchors}: {e}") from e
    mode = FitMode.OFFSET_ONLY if args.mode == "offset" else FitMode.OFFSET_DRIFT

    models, code = {}, EXIT_OK
    for sid, group in group_anchors(anchors).items():
        try:
            model, stats = fit_clock(group, mode)
        except (InsufficientAnchors, DegenerateTimes) as e:
            print(f"{sid}: {type(e).__name__}: {e}", file=sys.stderr)
            code = EXIT_ERRORS
            continue
        models[sid] = model
        if args.json:
            print(json.dumps({"stream": sid, **model.to_dict(), "residuals": stats.to_dict()},
                             sort_keys=True), file=out)
        else:
            print(f"{sid:<24} offset_ms={round(model.offset_ms, 6)!r} drift_ppm={round(model.drift_ppm, 6)!r} "
                  f"t0_ms={model.t0_ms} max_abs_ms={stats.max_abs_ms:.3g} rms_ms={stats.rms_ms:.3g} "
                  f"n={stats.count}", file=out)
    if args.out:
        try:
            Path(args.out).write_text(json.dumps(clocks_to_json(models), indent=1, sort_keys=True) + "\n")
        except OSError as e:
            raise _Exit(EXIT_IO, f"cannot write {args.out}: {e}") from e
    return code


def _unique_prefixes(ids: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for i in ids:
        n = seen.get(i, 0)
        seen[i] = n + 1
        out.append(i if n == 0 else f"{i}-{n}")
    return out


def _read_clocks(path: str) -> dict:
    try:
        return clocks_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    except OSError as e:
        raise _Exit(EXIT_IO, f"cannot read {path}: {e}") from e
    except (ValueError, KeyError, TypeError) as e:
        raise _Exit(EXIT_USAGE, f"{path}: malformed clocks file: {e}") from e


def cmd_align(args, out) -> int:
    profile = _profile(args.profile)
    sessions = [_load(d, profile) for d in args.dirs]
    clock_files = args.clocks or []
    if len(sessions) == 1:
        session = sessions[0]
        clocks = {}
        for path in clock_files:
            clocks.update(_read_clocks(path))
    else:
        prefixes = _unique_prefixes([s.session_id for s in sessions])
        session = merge_sessions(sessions, prefixes=prefixes)
        clocks = {}
        if len(clock_files) == len(sessions):
            # one clocks file per folder, keyed by plain file names
            for prefix, path in zip(prefixes, clock_files):
                for sid, m in _read_clocks(path).items():
                    name = f"{prefix}/{sid}"
                    clocks[name] = type(m)(name, m.offset_ms, m.drift_ppm, m.t0_ms)
        else:
            for path in clock_files:
                clocks.update(_read_clocks(path))
    if args.reference:
        if args.reference not in clocks:
            raise _Exit(EXIT_USAGE, f"reference stream {args.reference!r} has no clock model")
        clocks = rebase_clocks(clocks, args.reference)

    try:
        timeline = build_timeline(session, clocks, args.rate)
    except EmptyOverlap as e:
        print(f"EmptyOverlap: {e}", file=sys.stderr)
        return EXIT_ERRORS
    except NoStreams as e:
        print(f"NoStreams: {e}", file=sys.stderr)
        return EXIT_ERRORS

    start, end = timeline.window
    print(f"window: [{_num(start)}, {_num(end)}] length {_num(end - start)} ms", file=out)
    print(f"rate: {_num(timeline.rate_hz)} Hz", file=out)
    print(f"ticks: {timeline.tick_count}", file=out)
    for sid, a in timeline.streams.items():
        print(f"  {sid}: {int(a.out_of_tolerance.sum())} ticks out of tolerance", file=out)

    if args.out:
        outdir = Path(args.out)
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            with open(outdir / "alignment.jsonl", "w", encoding="utf-8", newline="\n") as fh:
                for tick in timeline.ticks():
                    fh.write(json.dumps({
                        "tick_index": tick.tick_index,
                        "t_ref_ms": tick.t_ref_ms,
                        "streams": {sid: {"frame": f, "residual_ms": r, "ok": not bad}
                                    for sid, (f, r, bad) in tick.frames.items()},
                    }) + "\n")
            if timeline.resampled_poses is not None:
                (outdir / "poses_resampled.txt").write_text(
                    serialize_pose_file(timeline.resampled_poses), encoding="utf-8")
        except OSError as e:
            raise _Exit(EXIT_IO, f"cannot write to {outdir}: {e}") from e
        print(f"wrote {outdir / 'alignment.jsonl'}", file=out)
    return EXIT_OK


def cmd_gen(args, out) -> int:
    _profile(args.device)
    scenario = Scenario(
        profile_id=args.device,
        duration_s=args.duration,
        clock_offset_ms=args.offset,
        clock_drift_ppm=args.drift,
        timestamp_jitter_sigma_ms=args.jitter,
        frame_drop_prob=args.drop,
        anchor_count=args.anchors,
        seed=args.seed,
    )
    try:
        gt = generate_session(scenario, args.out)
    except IoFailure as e:
        raise _Exit(EXIT_IO, str(e)) from e
    print(f"session {gt.session_id} ({args.device}, {args.duration:g} s, seed {args.seed}) -> {args.out}", file=out)
    for s in gt.log.streams:
        print(f"  {s.file_name:<14} {s.role.value:<6} {s.total_frames:>6} frames  {s.duration_ms} ms", file=out)
    print(f"  {len(gt.anchors)} anchors", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="egoalign", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("scan", help="summarise a session folder")
    sp.add_argument("dir")
    sp.add_argument("--json", action="store_true", help="findings as JSON lines")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("validate", help="check a session folder")
    sp.add_argument("dir")
    sp.add_argument("--profile", help="device profile id")
    sp.add_argument("--fps-tolerance", type=float, default=0.10)
    sp.add_argument("--json", action="store_true", help="findings as JSON lines")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("sync", help="fit clock models from an anchor CSV")
    sp.add_argument("--anchors", required=True)
    sp.add_argument("--mode", choices=("offset", "drift"), default="drift")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out", help="write clocks.json here")
    sp.set_defaults(func=cmd_sync)

    sp = sub.add_parser("align", help="align one or more session folders on a uniform grid")
    sp.add_argument("dirs", nargs="+")
    sp.add_argument("--clocks", action="append",
                    help="clocks.json; repeat once per folder, or give one file with prefixed stream ids")
    sp.add_argument("--reference", help="stream whose clock becomes the reference")
    sp.add_argument("--rate", type=float, help="target rate in Hz (default: slowest video stream)")
    sp.add_argument("--profile", help="device profile id")
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=cmd_align)

    sp = sub.add_parser("gen", help="generate a synthetic session with ground truth")
    sp.add_argument("--device", required=True)
    sp.add_argument("--duration", type=float, default=10.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--offset", type=float, default=0.0, help="device clock offset, ms")
    sp.add_argument("--drift", type=float, default=0.0, help="device clock drift, ppm")
    sp.add_argument("--jitter", type=float, default=0.0, help="timestamp jitter sigma, ms")
    sp.add_argument("--drop", type=float, default=0.0, help="frame drop probability")
    sp.add_argument("--anchors", type=int, default=20, help="anchors per stream")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except _Exit as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
