"""Multi-device egocentric capture sessions: logs, poses, containers, clocks and alignment."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import EgoAlignError, ParseError, ProbeError
from .logparse import parse_session_log, read_session_log, serialize_session_log
from .model import (
    DeviceProfile,
    Dialect,
    Finding,
    Role,
    SessionLog,
    Severity,
    StreamMeta,
    ValidationReport,
    builtin_profiles,
    get_profile,
)
from .mp4probe import Mp4Meta, probe_file, probe_mp4
from .poseio import PoseSample, PoseTrack, parse_pose_file, serialize_pose_file
from .session import Session, merge_sessions, scan_session, validate_session
from .sync import AnchorObservation, ClockModel, FitMode, apply_clock, clock_residuals, fit_clock
from .synth import Scenario, generate, generate_session
from .timeline import (
    AlignedTimeline,
    build_timeline,
    common_window,
    interpolate_pose,
    nearest_frame,
    slerp,
)

import types as _types

__all__ = [n for n, v in dict(globals()).items()
           if not n.startswith("_") and n != "annotations" and not isinstance(v, _types.ModuleType)]
