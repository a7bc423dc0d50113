"""Common window, uniform tick grid, nearest-frame mapping and pose resampling.

Logs only carry first/last timestamps and a frame count per stream, so frame
times are reconstructed as a uniform grid between the two. Everything that
depends on that assumption goes through :func:`frame_times` and
:func:`nearest_frames`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterator, Mapping, Sequence

import numpy as np

from .errors import EmptyOverlap, EmptyTrack, NonUnitInput, NoStreams, OutOfRange
from .model import Role, StreamMeta
from .poseio import N_TRANSFORMS, PoseSample, PoseTrack
from .sync import ClockModel, apply_clock

if TYPE_CHECKING:
    from .session import Session

# Two candidate frames whose |residual| differ by less than this are a tie.
# Epoch-scale doubles resolve ~0.25 us, so exact float comparison is noise.
TIE_EPS_MS = 1e-3


class InterpMode(str, Enum):
    STRICT = "strict"
    CLAMP = "clamp"


def _clock(clocks: Mapping[str, ClockModel] | None, stream_id: str) -> ClockModel:
    if clocks and stream_id in clocks:
        return clocks[stream_id]
    return ClockModel.identity(stream_id)


def common_window(streams: Sequence[tuple[StreamMeta, ClockModel]]) -> tuple[float, float]:
    if not streams:
        raise NoStreams("common window of zero streams")
    start = max(float(apply_clock(c, s.first_ts_ms)) for s, c in streams)
    end = min(float(apply_clock(c, s.last_ts_ms)) for s, c in streams)
    if start > end:
        raise EmptyOverlap(f"streams do not overlap: latest start {start:.3f} > earliest end {end:.3f}")
    return start, end


def frame_step_ms(stream: StreamMeta) -> float:
    """Device-clock spacing of the reconstructed frame grid (0 for one frame)."""
    if stream.total_frames < 2:
        return 0.0
    return stream.span_ms / (stream.total_frames - 1)


def frame_times(stream: StreamMeta, clock: ClockModel) -> np.ndarray:
    """Reference-clock times of every reconstructed frame."""
    i = np.arange(stream.total_frames, dtype=float)
    return apply_clock(clock, stream.first_ts_ms) + i * (frame_step_ms(stream) * clock.scale)


def nearest_frames(stream: StreamMeta, clock: ClockModel, t_ref_ms) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`nearest_frame`."""
    t = np.atleast_1d(np.asarray(t_ref_ms, dtype=float))
    n = stream.total_frames
    c0 = float(apply_clock(clock, stream.first_ts_ms))
    step = frame_step_ms(stream) * clock.scale
    if n < 2 or step <= 0:
        return np.zeros(t.shape, dtype=np.int64), c0 - t
    base = np.floor((t - c0) / step).astype(np.int64)
    cand = np.clip(base[:, None] + np.arange(-1, 3)[None, :], 0, n - 1)
    res = (c0 - t)[:, None] + cand * step
    err = np.abs(res)
    best = err.min(axis=1, keepdims=True)
    # lowest index among the near-equal minima
    masked = np.where(err <= best + TIE_EPS_MS, cand, n)
    pick = masked.argmin(axis=1)
    rows = np.arange(t.size)
    return cand[rows, pick], res[rows, pick]


def nearest_frame(stream: StreamMeta, clock: ClockModel, t_ref_ms: float) -> tuple[int, float]:
    """Index of the frame whose corrected time is closest to ``t_ref_ms``.

    Ties go to the lower index. The signed residual is corrected frame time
    minus query time; queries outside the stream clamp to its end frames.
    """
    idx, res = nearest_frames(stream, clock, [t_ref_ms])
    return int(idx[0]), float(res[0])


def _as_quats(q) -> np.ndarray:
    return np.asarray(q, dtype=float)


def slerp(q0, q1, u):
    """Shortest-arc spherical interpolation of (x, y, z, w) quaternions.

    Accepts single quaternions or (n, 4) stacks with scalar or (n,) ``u``.
    """
    q0, q1 = _as_quats(q0), _as_quats(q1)
    for q in (q0, q1):
        if np.any(np.abs(np.linalg.norm(q, axis=-1) - 1.0) > 1e-6):
            raise NonUnitInput("slerp needs unit quaternions")
    u = np.asarray(u, dtype=float)
    if q0.ndim == 2 and u.ndim == 1:
        u = u[:, None]
    dot = np.sum(q0 * q1, axis=-1, keepdims=True)
    q1 = np.where(dot < 0.0, -q1, q1)
    dot = np.abs(dot)
    near = dot > 1.0 - 1e-7
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    sin_t = np.sin(theta)
    safe = np.where(near, 1.0, sin_t)
    w0 = np.where(near, 1.0 - u, np.sin((1.0 - u) * theta) / safe)
    w1 = np.where(near, u, np.sin(u * theta) / safe)
    out = w0 * q0 + w1 * q1
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


class PoseInterpolator:
    """Pose lookup on the reference clock for one track.

    Bracketing uses binary search over corrected sample times; positions are
    linear, rotations are slerped per transform.
    """

    def __init__(self, track: PoseTrack, clock: ClockModel):
        if len(track) == 0:
            raise EmptyTrack("cannot interpolate an empty pose track")
        self.track = track
        self.times = apply_clock(clock, track.times())
        self.data = np.stack([s.to_array() for s in track.samples])

    def _rebadge(self, i: int, idx: int, t_ref_ms: float, normalize: bool) -> PoseSample:
        if normalize:
            arr = self.data[i].copy()
            arr[:, 3:] /= np.linalg.norm(arr[:, 3:], axis=1, keepdims=True)
            return PoseSample.from_array(idx, int(round(t_ref_ms)), arr)
        s = self.track[i]
        return PoseSample(idx, int(round(t_ref_ms)), s.head, s.left_hand, s.right_hand)

    def at(
        self,
        t_ref_ms: float,
        mode: InterpMode | str = InterpMode.STRICT,
        idx: int = 0,
        normalize: bool = False,
    ) -> PoseSample:
        """Pose at ``t_ref_ms``.

        Exact hits and clamped queries return the stored sample bit for bit
        unless ``normalize`` is set, in which case their rotations are
        rescaled to unit length like every interpolated output.
        """
        mode = InterpMode(mode)
        times = self.times
        if t_ref_ms < times[0] or t_ref_ms > times[-1]:
            if mode is InterpMode.STRICT:
                raise OutOfRange(
                    f"t={t_ref_ms:.3f} outside track [{times[0]:.3f}, {times[-1]:.3f}]"
                )
            return self._rebadge(0 if t_ref_ms < times[0] else len(times) - 1, idx, t_ref_ms, normalize)
        i = int(np.searchsorted(times, t_ref_ms, side="left"))
        if times[i] == t_ref_ms:
            return self._rebadge(i, idx, t_ref_ms, normalize)
        a, b = i - 1, i
        u = (t_ref_ms - times[a]) / (times[b] - times[a])
        pa, pb = self.data[a], self.data[b]
        pos = pa[:, :3] + u * (pb[:, :3] - pa[:, :3])
        qa = pa[:, 3:] / np.linalg.norm(pa[:, 3:], axis=1, keepdims=True)
        qb = pb[:, 3:] / np.linalg.norm(pb[:, 3:], axis=1, keepdims=True)
        rot = slerp(qa, qb, np.full(N_TRANSFORMS, u))
        return PoseSample.from_array(idx, int(round(t_ref_ms)), np.hstack([pos, rot]))


def interpolate_pose(
    track: PoseTrack,
    clock: ClockModel,
    t_ref_ms: float,
    mode: InterpMode | str = InterpMode.STRICT,
    idx: int = 0,
) -> PoseSample:
    return PoseInterpolator(track, clock).at(t_ref_ms, mode, idx)


@dataclass(frozen=True)
class TickRecord:
    tick_index: int
    t_ref_ms: float
    frames: dict  # stream id -> (frame_index, residual_ms, out_of_tolerance)


@dataclass
class StreamAlignment:
    stream_id: str
    frame_index: np.ndarray
    residual_ms: np.ndarray
    out_of_tolerance: np.ndarray
    tolerance_ms: float


@dataclass
class AlignedTimeline:
    rate_hz: float
    window: tuple[float, float]
    tick_times: np.ndarray
    streams: dict[str, StreamAlignment] = field(default_factory=dict)
    resampled_poses: PoseTrack | None = None

    @property
    def tick_count(self) -> int:
        return int(self.tick_times.size)

    def ticks(self) -> Iterator[TickRecord]:
        for k, t in enumerate(self.tick_times):
            yield TickRecord(k, float(t), {
                sid: (int(a.frame_index[k]), float(a.residual_ms[k]), bool(a.out_of_tolerance[k]))
                for sid, a in self.streams.items()
            })

    def frame_table(self) -> dict[str, np.ndarray]:
        return {sid: a.frame_index for sid, a in self.streams.items()}


def tick_grid(window: tuple[float, float], rate_hz: float) -> np.ndarray:
    if not rate_hz > 0:
        raise ValueError(f"rate must be positive, got {rate_hz}")
    start, end = window
    n = math.floor((end - start) * rate_hz / 1000.0 + 1e-9) + 1
    return start + np.arange(n) * (1000.0 / rate_hz)


def nominal_fps(stream: StreamMeta, profile=None) -> float | None:
    if profile is not None:
        if stream.role is Role.EGO:
            return profile.ego_fps
        if stream.role is Role.WRIST:
            return profile.wrist_fps
    return stream.effective_fps


def default_rate(session: "Session") -> float:
    """Slowest video stream's nominal rate, so the grid never invents frames."""
    rates = [r for r in (nominal_fps(s, session.profile) for s in session.log.video_streams) if r]
    if not rates:
        raise NoStreams("no video stream with a usable frame rate")
    return min(rates)


def build_timeline(
    session: "Session",
    clocks: Mapping[str, ClockModel] | None = None,
    rate_hz: float | None = None,
) -> AlignedTimeline:
    video = session.log.video_streams
    if not video:
        raise NoStreams("session has no video streams")
    windowed = [(s, _clock(clocks, s.file_name)) for s in video]
    poses_meta = session.log.poses_stream
    if poses_meta is not None:
        windowed.append((poses_meta, _clock(clocks, poses_meta.file_name)))
    window = common_window(windowed)
    rate = default_rate(session) if rate_hz is None else float(rate_hz)
    ticks = tick_grid(window, rate)

    timeline = AlignedTimeline(rate, window, ticks)
    for s in video:
        clock = _clock(clocks, s.file_name)
        idx, res = nearest_frames(s, clock, ticks)
        tol = 0.5 * frame_step_ms(s) * clock.scale
        timeline.streams[s.file_name] = StreamAlignment(
            s.file_name, idx, res, np.abs(res) > tol + TIE_EPS_MS, tol
        )

    if session.pose_track is not None and len(session.pose_track) > 0:
        pose_id = poses_meta.file_name if poses_meta is not None else "poses.txt"
        interp = PoseInterpolator(session.pose_track, _clock(clocks, pose_id))
        timeline.resampled_poses = PoseTrack(tuple(
            interp.at(float(t), InterpMode.CLAMP, idx=k, normalize=True) for k, t in enumerate(ticks)
        ))
    return timeline
