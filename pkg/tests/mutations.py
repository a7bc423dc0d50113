"""The documented corruption classes, each applied in place to a session folder.

Every function takes a clean generated folder and returns the finding code
that validation must raise as an error.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

from egoalign.logparse import parse_session_log, serialize_session_log


def _rewrite_log(root: Path, name: str, **changes) -> None:
    path = root / "log.txt"
    log = parse_session_log(path.read_text(encoding="utf-8"))
    streams = tuple(dataclasses.replace(s, **changes) if s.file_name == name else s for s in log.streams)
    path.write_text(serialize_session_log(dataclasses.replace(log, streams=streams)), encoding="utf-8")


def _data_lines(root: Path) -> tuple[list[str], list[int]]:
    lines = (root / "poses.txt").read_text(encoding="utf-8").splitlines()
    return lines, [i for i, ln in enumerate(lines) if not ln.startswith("#")]


def overwrite_timestamp(root: Path) -> str:
    log = parse_session_log((root / "log.txt").read_text(encoding="utf-8"))
    s = log.stream("internal.mp4")
    _rewrite_log(root, "internal.mp4", last_ts_ms=s.last_ts_ms + 1000)
    return "DURATION_MISMATCH"


def change_frame_count(root: Path) -> str:
    log = parse_session_log((root / "log.txt").read_text(encoding="utf-8"))
    _rewrite_log(root, "usb1.mp4", total_frames=log.stream("usb1.mp4").total_frames - 1)
    return "MP4_FRAMES"


def delete_pose_line(root: Path) -> str:
    lines, data = _data_lines(root)
    del lines[data[len(data) // 2]]
    (root / "poses.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return "POSE_COUNT"


def drop_joint(root: Path) -> str:
    lines, data = _data_lines(root)
    k = data[len(data) // 3]
    toks = lines[k].split()
    del toks[9 + 7 * 4: 9 + 7 * 5]  # left thumb tip
    lines[k] = " ".join(toks)
    (root / "poses.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return "POSE_PARSE"


def scale_quaternion(root: Path) -> str:
    lines, data = _data_lines(root)
    k = data[len(data) // 4]
    toks = lines[k].split()
    qw = 2 + 6  # head rotation w
    toks[qw] = f"{float(toks[qw]) * 1.5 + 0.5:.6f}"
    lines[k] = " ".join(toks)
    (root / "poses.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return "QUAT_NORM"


def delete_video(root: Path) -> str:
    (root / "usb1.mp4").unlink()
    return "FILE_MISSING"


CORRUPTIONS = {
    "timestamp": overwrite_timestamp,
    "frame_count": change_frame_count,
    "pose_line": delete_pose_line,
    "joint_count": drop_joint,
    "quaternion": scale_quaternion,
    "missing_file": delete_video,
}
