"""Domain types shared across the package and the built-in device registry."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping


class Role(str, Enum):
    EGO = "ego"
    WRIST = "wrist"
    POSES = "poses"


class Dialect(str, Enum):
    BASIC = "basic"
    EXTENDED = "extended"


class Tracking(str, Enum):
    SUPPORTED = "supported"
    UNSUPPORTED = "unsupported"
    MANUAL = "manual"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class DeviceProfile:
    """Expected stream characteristics of one host setup.

    ``tracking_logged`` is False for hosts that can track head and hands but
    do not write the data into the session folder (Apple Vision Pro).
    """

    device_id: str
    ego_format: str
    ego_resolution: tuple[int, int]
    ego_fps: float
    ego_bitrate_mbps: float
    wrist_format: str
    wrist_resolution: tuple[int, int]
    wrist_fps: float
    wrist_bitrate_mbps: float
    head_tracking: Tracking
    hand_tracking: Tracking
    max_wrist_cameras: int
    tracking_logged: bool = True

    def __post_init__(self) -> None:
        if self.ego_format not in ("mp4", "mov", "vrs"):
            raise ValueError(f"bad ego_format {self.ego_format!r}")
        if self.wrist_format not in ("mp4", "mov"):
            raise ValueError(f"bad wrist_format {self.wrist_format!r}")
        for res in (self.ego_resolution, self.wrist_resolution):
            if len(res) != 2 or min(res) <= 0:
                raise ValueError(f"resolution must be positive, got {res}")
        for v in (self.ego_fps, self.ego_bitrate_mbps, self.wrist_fps, self.wrist_bitrate_mbps):
            if not v > 0:
                raise ValueError("fps and bitrate must be positive")
        if self.max_wrist_cameras not in (0, 1, 2):
            raise ValueError("max_wrist_cameras must be 0, 1 or 2")

    @property
    def is_headset(self) -> bool:
        return self.device_id in ("avp", "quest3", "pico4ultra")

    @property
    def logs_poses(self) -> bool:
        return self.head_tracking is Tracking.SUPPORTED and self.tracking_logged


_S, _U, _M = Tracking.SUPPORTED, Tracking.UNSUPPORTED, Tracking.MANUAL

# Measured per-setup characteristics; AVP wrist numbers are the single-camera
# column (two cameras only work by constant switching at ~0.53 fps).
_PROFILES = {
    p.device_id: p
    for p in (
        DeviceProfile("android", "mp4", (1920, 1080), 29.84, 4.02, "mp4", (1280, 720), 30.00, 1.98, _U, _U, 2),
        DeviceProfile("aria", "vrs", (1408, 1408), 10.00, 8.85, "mp4", (1280, 720), 30.00, 1.98, _M, _M, 2),
        DeviceProfile("iphone_android", "mov", (1920, 1080), 30.00, 15.46, "mp4", (1280, 720), 30.00, 1.99, _U, _U, 2),
        DeviceProfile("iphone_ipad", "mov", (1920, 1080), 30.00, 15.44, "mov", (1280, 720), 27.37, 6.13, _U, _U, 2),
        DeviceProfile("avp", "mov", (1920, 1080), 29.88, 13.02, "mov", (1280, 720), 27.38, 2.47, _S, _S, 1,
                      tracking_logged=False),
        DeviceProfile("quest3", "mp4", (1280, 720), 59.42, 9.04, "mp4", (1280, 720), 27.37, 3.75, _S, _S, 2),
        DeviceProfile("pico4ultra", "mp4", (1280, 960), 89.31, 8.45, "mp4", (1280, 720), 27.36, 3.56, _S, _S, 2),
    )
}
_PROFILES_VIEW = MappingProxyType(_PROFILES)


def builtin_profiles() -> Mapping[str, DeviceProfile]:
    """Read-only registry of the seven host setups, keyed by device id."""
    return _PROFILES_VIEW


def get_profile(device_id: str) -> DeviceProfile:
    from .errors import UnknownProfile

    try:
        return _PROFILES[device_id]
    except KeyError:
        raise UnknownProfile(
            f"unknown device profile {device_id!r}; known: {', '.join(sorted(_PROFILES))}"
        ) from None


_USB_LABEL = re.compile(r"^USB Camera \d+$")


def role_for_label(source_label: str) -> tuple[Role, bool]:
    """Map a ``Source:`` label to a stream role.

    Returns ``(role, known)``; unknown labels fall back to wrist.
    """
    if source_label == "Internal Camera":
        return Role.EGO, True
    if source_label == "Poses":
        return Role.POSES, True
    if _USB_LABEL.match(source_label):
        return Role.WRIST, True
    return Role.WRIST, False


@dataclass(frozen=True)
class StreamMeta:
    """One ``File:`` block of a session log.

    Construction does not enforce the timing invariants; a tampered log must
    still load so that validation can report what is wrong with it.
    """

    file_name: str
    source_label: str
    total_frames: int
    first_ts_ms: int
    last_ts_ms: int
    duration_ms: int
    role: Role | None = None
    extras: tuple[tuple[str, str], ...] = ()
    origin: str | None = None

    def __post_init__(self) -> None:
        if self.role is None:
            object.__setattr__(self, "role", role_for_label(self.source_label)[0])

    @property
    def span_ms(self) -> int:
        return self.last_ts_ms - self.first_ts_ms

    @property
    def effective_fps(self) -> float | None:
        """(N - 1) / duration; None when undefined."""
        if self.total_frames < 2 or self.span_ms <= 0:
            return None
        return (self.total_frames - 1) * 1000.0 / self.span_ms

    @property
    def is_video(self) -> bool:
        return self.role in (Role.EGO, Role.WRIST)


SESSION_ID_FORMAT = "%Y%m%d_%H%M%S"


def parse_session_id(session_id: str) -> datetime | None:
    if not re.fullmatch(r"\d{8}_\d{6}", session_id):
        return None
    try:
        return datetime.strptime(session_id, SESSION_ID_FORMAT)
    except ValueError:
        return None


@dataclass(frozen=True)
class SessionLog:
    session_id: str
    dialect: Dialect
    streams: tuple[StreamMeta, ...] = ()
    started_wallclock: str | None = None
    ended_wallclock: str | None = None
    extras: tuple[tuple[str, str], ...] = ()

    def stream(self, file_name: str) -> StreamMeta:
        for s in self.streams:
            if s.file_name == file_name:
                return s
        raise KeyError(file_name)

    @property
    def poses_stream(self) -> StreamMeta | None:
        for s in self.streams:
            if s.role is Role.POSES:
                return s
        return None

    @property
    def video_streams(self) -> tuple[StreamMeta, ...]:
        return tuple(s for s in self.streams if s.is_video)


@dataclass(frozen=True)
class Finding:
    severity: Severity
    code: str
    stream: str | None
    message: str

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "stream": self.stream,
            "message": self.message,
        }


# Closed set of finding codes produced by validation.
FINDING_CODES = frozenset({
    "NO_STREAMS",          # log declares no streams
    "DURATION_MISMATCH",   # duration != last - first
    "TS_ORDER",            # last < first
    "FRAME_COUNT",         # total frames < 1
    "FILE_MISSING",        # declared media file absent
    "POSES_MISSING",       # poses stream declared but poses.txt absent
    "POSE_PARSE",          # poses.txt failed to parse
    "POSE_COUNT",          # poses.txt samples != declared frames
    "QUAT_NORM",           # non-unit quaternion in poses.txt
    "IDX_GAP",             # skipped pose index
    "TIME_GAP",            # pose interval above the gap limit
    "TIME_DUP",            # repeated pose timestamp
    "MP4_PROBE",           # container could not be probed
    "MP4_FRAMES",          # container sample count != declared frames
    "MP4_DURATION",        # container duration differs from declared
    "FPS_DEVIATION",       # effective rate off the profile expectation
    "NO_POSES",            # tracking host without a poses stream
    "WRIST_COUNT",         # more wrist streams than the host supports
    "FORMAT_MISMATCH",     # file extension differs from the profile
    "UNKNOWN_SOURCE",      # unrecognised Source: label
    "BAD_SESSION_ID",      # session id is not yyyyMMdd_HHmmss
    "SESSION_ID_MISMATCH", # folder name disagrees with the log header
    "PROFILE_UNBOUND",     # profile checks skipped
})


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.ERROR)

    @property
    def has_errors(self) -> bool:
        return any(f.severity is Severity.ERROR for f in self.findings)

    def codes(self, severity: Severity | None = None) -> Counter:
        return Counter(f.code for f in self.findings if severity is None or f.severity is severity)

    def by_code(self, code: str) -> list[Finding]:
        return [f for f in self.findings if f.code == code]

    @classmethod
    def of(cls, findings: Iterable[Finding]) -> "ValidationReport":
        return cls(tuple(findings))


def finding(severity: Severity, code: str, stream: str | None, message: str) -> Finding:
    assert code in FINDING_CODES, code
    return Finding(severity, code, stream, message)

