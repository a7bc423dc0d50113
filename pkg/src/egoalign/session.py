"""Session folders: discovery, whole-session validation and cross-folder merging.

A session folder holds ``log.txt``, optionally ``poses.txt``, and one video
file per camera (``internal.mp4``, ``usb1.mp4``, ...).
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import DuplicateStreamName, EmptyInput, MissingLog, ParseError, ProbeError, UnreadableDir
from .logparse import parse_session_log
from .model import (
    DeviceProfile,
    Finding,
    Role,
    SessionLog,
    Severity,
    StreamMeta,
    ValidationReport,
    finding,
    parse_session_id,
    role_for_label,
)
from .mp4probe import Mp4Meta, cross_check_mp4, probe_mp4
from .poseio import POSES_FILE, PoseTrack, parse_pose_file, validate_pose_track

log = logging.getLogger(__name__)

LOG_FILE = "log.txt"
VIDEO_SUFFIXES = (".mp4", ".mov")


@dataclass(frozen=True)
class Session:
    root_path: Path
    log: SessionLog
    pose_track: PoseTrack | None = None
    mp4_meta: Mapping[str, Mp4Meta] = field(default_factory=dict)
    profile: DeviceProfile | None = None
    scan_findings: tuple[Finding, ...] = ()
    # merged sessions only: stream-name prefix -> folder holding its files
    sources: Mapping[str, Path] = field(default_factory=dict)

    @property
    def is_merged(self) -> bool:
        return bool(self.sources)

    @property
    def session_id(self) -> str:
        """Folder name when it is a session timestamp, else the log header."""
        if not self.is_merged and parse_session_id(self.root_path.name) is not None:
            return self.root_path.name
        return self.log.session_id

    def path_for(self, stream: StreamMeta) -> Path:
        if self.is_merged:
            prefix, _, name = stream.file_name.partition("/")
            return self.sources[prefix] / name
        return self.root_path / stream.file_name

    @property
    def streams(self) -> tuple[StreamMeta, ...]:
        return self.log.streams


def scan_session(root_path, profile: DeviceProfile | None = None) -> Session:
    """Load a session folder.

    Pose-file and container problems become findings on the returned session;
    only a missing folder or log is fatal (log syntax errors propagate as
    :class:`ParseError`).
    """
    root = Path(root_path)
    if not root.is_dir():
        raise UnreadableDir(f"not a readable directory: {root}")
    log_path = root / LOG_FILE
    try:
        text = log_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MissingLog(f"no {LOG_FILE} in {root}") from None
    except OSError as e:
        raise UnreadableDir(f"cannot read {log_path}: {e}") from e
    session_log = parse_session_log(text)

    findings: list[Finding] = []
    pose_track = None
    poses_meta = session_log.poses_stream
    poses_name = poses_meta.file_name if poses_meta is not None else POSES_FILE
    poses_path = root / poses_name
    if poses_path.is_file():
        try:
            pose_track = parse_pose_file(poses_path.read_text(encoding="utf-8"))
        except ParseError as e:
            findings.append(finding(Severity.ERROR, "POSE_PARSE", poses_name, str(e)))

    mp4_meta = {}
    for path in sorted(p for p in root.iterdir() if p.suffix.lower() in VIDEO_SUFFIXES and p.is_file()):
        try:
            mp4_meta[path.name] = probe_mp4(path.read_bytes())
        except ProbeError as e:
            findings.append(finding(Severity.WARNING, "MP4_PROBE", path.name, f"cannot probe: {e}"))

    return Session(root, session_log, pose_track, mp4_meta, profile, tuple(findings))


def _expected_fps(stream: StreamMeta, profile: DeviceProfile) -> float:
    # pose logging runs on the render loop, which tracks the ego camera rate
    return profile.wrist_fps if stream.role is Role.WRIST else profile.ego_fps


def _expected_format(stream: StreamMeta, profile: DeviceProfile) -> str:
    return profile.wrist_format if stream.role is Role.WRIST else profile.ego_format


def _check_stream(s: StreamMeta, session: Session, profile, fps_tolerance, dur_tol_ms) -> list[Finding]:
    out = []
    name = s.file_name
    if not role_for_label(s.source_label)[1]:
        out.append(finding(Severity.WARNING, "UNKNOWN_SOURCE", name,
                           f"unknown source label {s.source_label!r}; treated as {s.role.value}"))
    if s.total_frames < 1:
        out.append(finding(Severity.ERROR, "FRAME_COUNT", name, f"total frames {s.total_frames} < 1"))
    if s.last_ts_ms < s.first_ts_ms:
        out.append(finding(Severity.ERROR, "TS_ORDER", name,
                           f"last timestamp {s.last_ts_ms} before first {s.first_ts_ms}"))
    if s.duration_ms != s.span_ms:
        out.append(finding(Severity.ERROR, "DURATION_MISMATCH", name,
                           f"duration {s.duration_ms} ms != last - first = {s.span_ms} ms"))

    if s.is_video:
        path = session.path_for(s)
        if not path.is_file():
            # a VRS ego stream stays on the glasses; the host folder never has it
            on_glasses = path.suffix.lower() == ".vrs" and (profile is None or profile.device_id == "aria")
            sev = Severity.WARNING if on_glasses else Severity.ERROR
            out.append(finding(sev, "FILE_MISSING", name, f"{path.name} not found"))
        elif name in session.mp4_meta:
            out.extend(cross_check_mp4(session.mp4_meta[name], s, dur_tol_ms))
        if profile is not None:
            want = _expected_format(s, profile)
            have = Path(name).suffix.lower().lstrip(".")
            if have != want:
                out.append(finding(Severity.WARNING, "FORMAT_MISMATCH", name,
                                   f"{have or 'no extension'} file, profile {profile.device_id} expects {want}"))

    if profile is not None and s.effective_fps is not None:
        want = _expected_fps(s, profile)
        have = s.effective_fps
        if abs(have - want) > fps_tolerance * want:
            out.append(finding(Severity.WARNING, "FPS_DEVIATION", name,
                               f"effective rate {have:.2f} Hz vs expected {want:.2f} Hz"))
    return out


def _check_poses(s: StreamMeta, session: Session, profile, quat_tol, parse_failed) -> list[Finding]:
    out = []
    track = session.pose_track
    if track is None:
        if not parse_failed:
            out.append(finding(Severity.WARNING, "POSES_MISSING", s.file_name,
                               f"log declares {s.file_name} but the file is absent"))
        return out
    if len(track) != s.total_frames:
        out.append(finding(Severity.ERROR, "POSE_COUNT", s.file_name,
                           f"{len(track)} pose samples, log declares {s.total_frames}"))
    rate = profile.ego_fps if profile is not None else s.effective_fps
    out.extend(validate_pose_track(track, quat_tol=quat_tol, nominal_rate_hz=rate, stream=s.file_name))
    return out


def validate_session(
    session: Session,
    profile: DeviceProfile | None = None,
    fps_tolerance: float = 0.10,
    quat_tol: float = 1e-3,
    dur_tol_ms: int = 100,
) -> ValidationReport:
    """Check a scanned session for internal consistency and against a profile.

    Never raises for data problems; each one becomes a finding.
    """
    profile = profile if profile is not None else session.profile
    out = list(session.scan_findings)
    slog = session.log

    if not slog.streams:
        out.append(finding(Severity.ERROR, "NO_STREAMS", None, "log declares no streams"))
    if parse_session_id(slog.session_id) is None:
        out.append(finding(Severity.WARNING, "BAD_SESSION_ID", None,
                           f"session id {slog.session_id!r} is not yyyyMMdd_HHmmss"))
    if not session.is_merged and session.session_id != slog.session_id:
        out.append(finding(Severity.WARNING, "SESSION_ID_MISMATCH", None,
                           f"folder {session.session_id} vs log header {slog.session_id}; folder wins"))

    parse_failed = any(f.code == "POSE_PARSE" for f in session.scan_findings)
    for s in slog.streams:
        out.extend(_check_stream(s, session, profile, fps_tolerance, dur_tol_ms))
        if s.role is Role.POSES:
            out.extend(_check_poses(s, session, profile, quat_tol, parse_failed))

    if profile is None:
        out.append(finding(Severity.INFO, "PROFILE_UNBOUND", None, "no device profile; profile checks skipped"))
    else:
        if profile.logs_poses and slog.poses_stream is None:
            out.append(finding(Severity.WARNING, "NO_POSES", None,
                               f"{profile.device_id} tracks head and hands but no poses stream is logged"))
        n_wrist = sum(1 for s in slog.streams if s.role is Role.WRIST)
        if n_wrist > profile.max_wrist_cameras:
            out.append(finding(Severity.WARNING, "WRIST_COUNT", None,
                               f"{n_wrist} wrist streams, {profile.device_id} supports {profile.max_wrist_cameras}"))
    return ValidationReport(tuple(out))


def merge_sessions(
    sessions: Sequence[Session],
    role_map: Mapping[str, Role | str] | None = None,
    prefixes: Sequence[str] | None = None,
) -> Session:
    """Union the streams of several folders into one logical session.

    Stream names become ``<prefix>/<file>`` (prefix defaults to the session
    id) and each stream keeps its origin session id. ``role_map`` overrides
    roles by the prefixed name. Clocks are not reconciled here. Only the first
    poses stream survives; later ones are dropped with a log warning.
    """
    if not sessions:
        raise EmptyInput("nothing to merge")
    role_map = dict(role_map or {})
    prefixes = list(prefixes) if prefixes is not None else [s.session_id for s in sessions]
    if len(prefixes) != len(sessions):
        raise ValueError("one prefix per session")
    if len(set(prefixes)) != len(prefixes):
        dup = sorted({p for p in prefixes if prefixes.count(p) > 1})
        raise DuplicateStreamName(f"prefixes repeat: {dup}; pass distinct prefixes")
    for p in prefixes:
        if "/" in p or not p:
            raise ValueError(f"bad prefix {p!r}")

    streams: list[StreamMeta] = []
    seen: set[str] = set()
    mp4_meta: dict[str, Mp4Meta] = {}
    findings: list[Finding] = []
    pose_track = None
    have_poses = False
    for sess, prefix in zip(sessions, prefixes):
        for s in sess.log.streams:
            name = f"{prefix}/{s.file_name}"
            if name in seen:
                raise DuplicateStreamName(name)
            seen.add(name)
            role = Role(role_map.pop(name)) if name in role_map else s.role
            if role is Role.POSES:
                if have_poses:
                    log.warning("dropping extra poses stream %s", name)
                    continue
                have_poses = True
                pose_track = sess.pose_track
            streams.append(dataclasses.replace(s, file_name=name, role=role, origin=sess.session_id))
        for k, meta in sess.mp4_meta.items():
            mp4_meta[f"{prefix}/{k}"] = meta
        findings.extend(
            dataclasses.replace(f, stream=f"{prefix}/{f.stream}" if f.stream else None)
            for f in sess.scan_findings
        )
    if role_map:
        raise KeyError(f"role_map names unknown streams: {sorted(role_map)}")

    first = sessions[0]
    merged_log = dataclasses.replace(first.log, streams=tuple(streams))
    profiles = {s.profile for s in sessions}
    return Session(
        root_path=first.root_path,
        log=merged_log,
        pose_track=pose_track,
        mp4_meta=mp4_meta,
        profile=profiles.pop() if len(profiles) == 1 else None,
        scan_findings=tuple(findings),
        sources={p: s.root_path for s, p in zip(sessions, prefixes)},
    )
