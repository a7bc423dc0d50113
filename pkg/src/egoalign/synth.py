"""Synthetic session generator with known ground truth.

A :class:`Scenario` fully determines the output folder, byte for byte:
``log.txt``, ``poses.txt`` (tracking hosts), one stub container per video
stream, ``anchors.csv`` and ``ground_truth.json``.

Timing model, per stream: the camera fires on a uniform grid in reference
time at the profile rate, starting a random lag after the session start. The
device clock maps to reference time by the stream's true :class:`ClockModel`
(with ``t0_ms`` at the first frame), so device timestamps are the inverse
mapping plus optional Gaussian jitter, floored to whole milliseconds.
Dropped frames are removed from the interior of the grid.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import IoFailure
from .logparse import serialize_session_log
from .model import DeviceProfile, Dialect, Role, SessionLog, StreamMeta, get_profile
from .poseio import N_JOINTS, POSES_FILE, PoseSample, PoseTrack, serialize_pose_file
from .sync import AnchorObservation, ClockModel, apply_clock, format_anchor_csv

DEFAULT_START_MS = 1778528808000
ANCHORS_FILE = "anchors.csv"
GROUND_TRUTH_FILE = "ground_truth.json"
TIE_EPS_MS = 1e-3


# --------------------------------------------------------------------------
# stub containers

def _box(box_type: bytes, payload: bytes) -> bytes:
    size = 8 + len(payload)
    if size > 0xFFFFFFFF:
        return struct.pack(">I4sQ", 1, box_type, size + 8) + payload
    return struct.pack(">I4s", size, box_type) + payload


def _full_box(box_type: bytes, version: int, flags: int, payload: bytes) -> bytes:
    return _box(box_type, struct.pack(">I", (version << 24) | flags) + payload)


_MATRIX = struct.pack(">9I", 0x00010000, 0, 0, 0, 0x00010000, 0, 0, 0, 0x40000000)


def uniform_deltas(n: int, total_ticks: int) -> list[tuple[int, int]]:
    """Split ``total_ticks`` over ``n`` samples as evenly as integers allow."""
    if n < 1 or total_ticks < n:
        raise ValueError(f"cannot spread {total_ticks} ticks over {n} samples")
    q, r = divmod(total_ticks, n)
    return [(c, d) for c, d in ((n - r, q), (r, q + 1)) if c]


def write_stub_mp4(
    timescale: int,
    sample_deltas: Sequence[tuple[int, int]],
    width: int = 1280,
    height: int = 720,
    brand: bytes = b"isom",
) -> bytes:
    """Container with ``ftyp``, a one-track ``moov`` and an empty ``mdat``.

    Header boxes switch to version 1 when the duration overflows 32 bits.
    """
    if not sample_deltas:
        raise ValueError("need at least one (count, delta) entry")
    if timescale <= 0 or any(c <= 0 or d <= 0 for c, d in sample_deltas):
        raise ValueError("timescale, counts and deltas must be positive")
    duration = sum(c * d for c, d in sample_deltas)
    v = 1 if duration > 0xFFFFFFFF else 0

    def times(ts: int | None) -> bytes:
        if v:
            return struct.pack(">QQ", 0, 0) + (struct.pack(">IQ", ts, duration) if ts else b"")
        return struct.pack(">II", 0, 0) + (struct.pack(">II", ts, duration) if ts else b"")

    mvhd = _full_box(b"mvhd", v, 0, times(timescale) + struct.pack(">iH", 0x00010000, 0x0100)
                     + bytes(10) + _MATRIX + bytes(24) + struct.pack(">I", 2))
    tk_dur = struct.pack(">Q", duration) if v else struct.pack(">I", duration)
    tkhd = _full_box(b"tkhd", v, 3, times(None) + struct.pack(">II", 1, 0) + tk_dur + bytes(8)
                     + struct.pack(">hhhH", 0, 0, 0, 0) + _MATRIX
                     + struct.pack(">II", width << 16, height << 16))
    mdhd = _full_box(b"mdhd", v, 0, times(timescale) + struct.pack(">HH", 0x55C4, 0))
    hdlr = _full_box(b"hdlr", 0, 0, struct.pack(">I4s", 0, b"vide") + bytes(12) + b"VideoHandler\0")
    stts = _full_box(b"stts", 0, 0, struct.pack(">I", len(sample_deltas))
                     + b"".join(struct.pack(">II", c, d) for c, d in sample_deltas))
    stbl = _box(b"stbl", b"".join([
        _full_box(b"stsd", 0, 0, struct.pack(">I", 0)),
        stts,
        _full_box(b"stsc", 0, 0, struct.pack(">I", 0)),
        _full_box(b"stsz", 0, 0, struct.pack(">II", 0, 0)),
        _full_box(b"stco", 0, 0, struct.pack(">I", 0)),
    ]))
    dinf = _box(b"dinf", _full_box(b"dref", 0, 0, struct.pack(">I", 1) + _full_box(b"url ", 0, 1, b"")))
    minf = _box(b"minf", _full_box(b"vmhd", 0, 1, bytes(8)) + dinf + stbl)
    trak = _box(b"trak", tkhd + _box(b"mdia", mdhd + hdlr + minf))
    ftyp = _box(b"ftyp", brand + struct.pack(">I", 512) + b"isom" + b"iso2" + b"mp41")
    return ftyp + _box(b"moov", mvhd + trak) + _box(b"mdat", b"")


def stub_for_stream(stream: StreamMeta, resolution=(1280, 720), brand=b"isom") -> bytes:
    """Stub whose sample count and media duration match the log block."""
    n, span = stream.total_frames, max(stream.span_ms, 0)
    if span >= n:
        return write_stub_mp4(1000, uniform_deltas(n, span), *resolution, brand=brand)
    return write_stub_mp4(90000, uniform_deltas(n, max(span * 90, n)), *resolution, brand=brand)


# --------------------------------------------------------------------------
# analytic pose trajectory

def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of (x, y, z, w) quaternions, broadcasting."""
    ax, ay, az, aw = np.moveaxis(a, -1, 0)
    bx, by, bz, bw = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    ], axis=-1)


def axis_angle(axis: np.ndarray, angle) -> np.ndarray:
    angle = np.asarray(angle, dtype=float)[..., None]
    return np.concatenate([np.sin(angle / 2) * axis, np.cos(angle / 2)], axis=-1)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


@dataclass
class RigidMotion:
    """Sinusoidal translation plus constant-rate rotation about a fixed axis."""

    center: list
    amplitude: list
    freq_hz: list
    phase: list
    base_rotation: list
    axis: list
    rate_rad_s: float

    def position(self, tau: np.ndarray) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)[..., None]
        return np.asarray(self.center) + np.asarray(self.amplitude) * np.sin(
            2 * np.pi * np.asarray(self.freq_hz) * tau + np.asarray(self.phase))

    def rotation(self, tau: np.ndarray) -> np.ndarray:
        spin = axis_angle(np.asarray(self.axis), self.rate_rad_s * np.asarray(tau, dtype=float))
        return qmul(np.asarray(self.base_rotation), spin)

    @classmethod
    def random(cls, rng: np.random.Generator, center, amp_max: float) -> "RigidMotion":
        return cls(
            center=[float(v) for v in center],
            amplitude=[float(v) for v in rng.uniform(0.2, 1.0, 3) * amp_max],
            freq_hz=[float(v) for v in rng.uniform(0.1, 0.5, 3)],
            phase=[float(v) for v in rng.uniform(0, 2 * np.pi, 3)],
            base_rotation=[float(v) for v in _unit(rng.normal(size=4))],
            axis=[float(v) for v in _unit(rng.normal(size=3))],
            rate_rad_s=float(rng.uniform(-1.0, 1.0)),
        )


@dataclass
class PoseTrajectory:
    """Closed-form head and hand motion on the reference clock.

    Hand joints ride on their wrist: a fixed world-frame position offset and a
    fixed rotation composed after the wrist rotation, so every joint keeps a
    constant-rate rotation and slerp between samples is exact.
    """

    origin_ms: float
    head: RigidMotion
    wrists: list  # [left, right]
    joint_offsets: list  # [hand][joint] -> xyz
    joint_rotations: list  # [hand][joint] -> xyzw

    def evaluate(self, t_ref_ms) -> np.ndarray:
        """(..., 53, 7) pose array at reference time(s)."""
        tau = (np.asarray(t_ref_ms, dtype=float) - self.origin_ms) / 1000.0
        parts = [np.concatenate([self.head.position(tau), self.head.rotation(tau)], axis=-1)[..., None, :]]
        for h, wrist in enumerate(self.wrists):
            wp = wrist.position(tau)[..., None, :]
            wq = wrist.rotation(tau)[..., None, :]
            pos = wp + np.asarray(self.joint_offsets[h])
            rot = qmul(wq, np.asarray(self.joint_rotations[h]))
            parts.append(np.concatenate([pos, rot], axis=-1))
        return np.concatenate(parts, axis=-2)

    @classmethod
    def random(cls, rng: np.random.Generator, origin_ms: float) -> "PoseTrajectory":
        head = RigidMotion.random(rng, [0.0, 1.6, 0.0], 0.05)
        wrists = [RigidMotion.random(rng, [x, 1.1, -0.35], 0.08) for x in (-0.2, 0.2)]
        offsets, rotations = [], []
        for _ in range(2):
            off = rng.normal(scale=0.04, size=(N_JOINTS, 3))
            off[1] = 0.0  # slot 1 is the wrist itself
            rot = np.array([_unit(q) for q in rng.normal(size=(N_JOINTS, 4))])
            rot[1] = (0.0, 0.0, 0.0, 1.0)
            offsets.append(off.tolist())
            rotations.append(rot.tolist())
        return cls(float(origin_ms), head, wrists, offsets, rotations)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "PoseTrajectory":
        return cls(d["origin_ms"], RigidMotion(**d["head"]), [RigidMotion(**w) for w in d["wrists"]],
                   d["joint_offsets"], d["joint_rotations"])


# --------------------------------------------------------------------------
# scenario and generation

@dataclass(frozen=True)
class Scenario:
    """Everything that determines a generated session.

    ``clock_offset_ms``/``clock_drift_ppm`` describe the recording device's
    clock against the reference; ``stream_clocks`` overrides them per file
    name. ``anchor_jitter_sigma_ms`` defaults to the frame timestamp jitter.
    """

    profile_id: str
    duration_s: float = 10.0
    clock_offset_ms: float = 0.0
    clock_drift_ppm: float = 0.0
    stream_clocks: tuple[tuple[str, float, float], ...] = ()
    timestamp_jitter_sigma_ms: float = 0.0
    frame_drop_prob: float = 0.0
    anchor_count: int = 20
    seed: int = 0
    anchor_jitter_sigma_ms: float | None = None
    start_ms: int = DEFAULT_START_MS

    def __post_init__(self) -> None:
        if not self.duration_s > 0:
            raise ValueError("duration must be positive")
        if not 0.0 <= self.frame_drop_prob < 1.0:
            raise ValueError("frame_drop_prob must be in [0, 1)")
        if self.timestamp_jitter_sigma_ms < 0 or (self.anchor_jitter_sigma_ms or 0) < 0:
            raise ValueError("jitter must be non-negative")
        if self.anchor_count < 0:
            raise ValueError("anchor_count must be non-negative")

    @property
    def anchor_sigma(self) -> float:
        if self.anchor_jitter_sigma_ms is None:
            return self.timestamp_jitter_sigma_ms
        return self.anchor_jitter_sigma_ms

    def clock_truth(self, file_name: str) -> tuple[float, float]:
        for name, off, drift in self.stream_clocks:
            if name == file_name:
                return off, drift
        return self.clock_offset_ms, self.clock_drift_ppm


@dataclass
class GroundTruth:
    scenario: Scenario
    session_id: str
    clocks: dict[str, ClockModel]
    frame_times: dict[str, list[int]]
    frame_ids: dict[str, list[int]]
    trajectory: PoseTrajectory | None
    anchors: list[AnchorObservation]
    log: SessionLog
    alignment: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "scenario": asdict(self.scenario),
            "session_id": self.session_id,
            "clocks": {k: v.to_dict() for k, v in sorted(self.clocks.items())},
            "frame_times_ms": self.frame_times,
            "frame_ids": self.frame_ids,
            "trajectory": self.trajectory.to_dict() if self.trajectory else None,
            "anchors": [[a.stream_id, a.stream_ts_ms, str(a.ref_ts_ms)] for a in self.anchors],
            "alignment": self.alignment,
        }, sort_keys=True, indent=1) + "\n"


def load_ground_truth(path) -> dict:
    """Parsed ``ground_truth.json`` with clocks and trajectory rebuilt."""
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    d["clocks"] = {k: ClockModel(k, v["offset_ms"], v["drift_ppm"], v["t0_ms"]) for k, v in d["clocks"].items()}
    if d["trajectory"] is not None:
        d["trajectory"] = PoseTrajectory.from_dict(d["trajectory"])
    d["anchors"] = [AnchorObservation(s, ts, Decimal(r)) for s, ts, r in d["anchors"]]
    return d


@dataclass
class _PlannedStream:
    file_name: str
    label: str
    role: Role
    fps: float


def _plan_streams(profile: DeviceProfile) -> list[_PlannedStream]:
    plan = [_PlannedStream(f"internal.{profile.ego_format}", "Internal Camera", Role.EGO, profile.ego_fps)]
    for k in range(1, profile.max_wrist_cameras + 1):
        plan.append(_PlannedStream(f"usb{k}.{profile.wrist_format}", f"USB Camera {k}", Role.WRIST, profile.wrist_fps))
    if profile.logs_poses:
        plan.append(_PlannedStream(POSES_FILE, "Poses", Role.POSES, profile.ego_fps))
    return plan


def _wallclock(ms: float) -> str:
    dt = datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)
    return dt.strftime("%Y-%m-%d %H:%M:%S.") + f"{dt.microsecond // 1000:03d}"


def _exact_ref(clock: ClockModel, ts: int) -> Fraction:
    return (Fraction(ts) + Fraction(clock.offset_ms)
            + Fraction(clock.drift_ppm) * (ts - clock.t0_ms) / 1_000_000)


def _to_decimal(x: Fraction) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 40
        return (Decimal(x.numerator) / Decimal(x.denominator)).quantize(Decimal("1e-9"))


def _frame_times(rng, n: int, fps: float, clock: ClockModel, sigma: float, drop: float):
    """Device timestamps (int ms) and kept frame indices for one stream."""
    i = np.arange(n)
    rel = i * (1000.0 / fps) / clock.scale
    if sigma > 0:
        rel = rel + rng.normal(0.0, sigma, n)
    ts = np.sort(clock.t0_ms + np.floor(rel + 1e-9).astype(np.int64))
    keep = np.ones(n, dtype=bool)
    if drop > 0 and n > 2:
        keep[1:-1] = rng.random(n - 2) >= drop
    return ts[keep], i[keep]


def generate(scenario: Scenario, alignment: bool = True) -> tuple[GroundTruth, dict[str, bytes]]:
    """Build the session in memory: ground truth plus ``{file name: bytes}``.

    ``alignment=False`` skips the exhaustive nearest-frame table, whose cost
    grows with ticks x frames and dominates long scenarios.
    """
    profile = get_profile(scenario.profile_id)
    rng = np.random.default_rng(scenario.seed)
    plan = _plan_streams(profile)
    start = float(scenario.start_ms)

    clocks: dict[str, ClockModel] = {}
    frame_times: dict[str, list[int]] = {}
    frame_ids: dict[str, list[int]] = {}
    metas: list[StreamMeta] = []
    for ps in plan:
        off, drift = scenario.clock_truth(ps.file_name)
        lag = int(rng.integers(0, 200))
        t0 = math.floor(start + lag - off)
        clock = ClockModel(ps.file_name, float(off), float(drift), t0)
        n = math.floor(scenario.duration_s * ps.fps) + 1
        ts, ids = _frame_times(rng, n, ps.fps, clock, scenario.timestamp_jitter_sigma_ms, scenario.frame_drop_prob)
        clocks[ps.file_name] = clock
        frame_times[ps.file_name] = [int(v) for v in ts]
        frame_ids[ps.file_name] = [int(v) for v in ids]
        first, last = int(ts[0]), int(ts[-1])
        metas.append(StreamMeta(ps.file_name, ps.label, int(ts.size), first, last, last - first, ps.role))

    end_ms = max(float(apply_clock(clocks[m.file_name], m.last_ts_ms)) for m in metas)
    session_id = datetime.fromtimestamp(start / 1000.0, tz=timezone.utc).strftime("%Y%m%d_%H%M%S")
    extended = profile.is_headset
    slog = SessionLog(
        session_id=session_id,
        dialect=Dialect.EXTENDED if extended else Dialect.BASIC,
        streams=tuple(metas),
        started_wallclock=_wallclock(start) if extended else None,
        ended_wallclock=_wallclock(end_ms) if extended else None,
    )

    files: dict[str, bytes] = {"log.txt": serialize_session_log(slog).encode("utf-8")}
    brand = {"mp4": b"isom", "mov": b"qt  "}
    for m in metas:
        if m.role is Role.POSES:
            continue
        fmt = m.file_name.rsplit(".", 1)[-1]
        if fmt == "vrs":
            continue  # recorded on the glasses, never in the host folder
        res = profile.ego_resolution if m.role is Role.EGO else profile.wrist_resolution
        files[m.file_name] = stub_for_stream(m, res, brand[fmt])

    trajectory = None
    if profile.logs_poses:
        trajectory = PoseTrajectory.random(rng, start)
        clock = clocks[POSES_FILE]
        t_ms = np.array(frame_times[POSES_FILE], dtype=np.int64)
        arr = trajectory.evaluate(apply_clock(clock, t_ms))
        samples = tuple(
            PoseSample.from_array(idx, int(t), a)
            for idx, t, a in zip(frame_ids[POSES_FILE], t_ms, arr)
        )
        files[POSES_FILE] = serialize_pose_file(PoseTrack(samples)).encode("utf-8")

    anchors: list[AnchorObservation] = []
    for m in metas:
        clock = clocks[m.file_name]
        if scenario.anchor_count == 0:
            continue
        ts = [clock.t0_ms] + [int(v) for v in np.sort(rng.integers(m.first_ts_ms, m.last_ts_ms + 1,
                                                                     scenario.anchor_count - 1))]
        noise = rng.normal(0.0, scenario.anchor_sigma, len(ts)) if scenario.anchor_sigma > 0 else np.zeros(len(ts))
        for t, e in zip(ts, noise):
            anchors.append(AnchorObservation(m.file_name, t, _to_decimal(_exact_ref(clock, t) + Fraction(float(e)))))
    files[ANCHORS_FILE] = format_anchor_csv(anchors).encode("utf-8")

    gt = GroundTruth(scenario, session_id, clocks, frame_times, frame_ids, trajectory, anchors, slog)
    if alignment:
        rate = min(p.fps for p in plan if p.role is not Role.POSES)
        gt.alignment = oracle_alignment([(m, clocks[m.file_name]) for m in metas], rate)
    files[GROUND_TRUTH_FILE] = gt.to_json().encode("utf-8")
    return gt, files


def generate_session(scenario: Scenario, out_dir, alignment: bool = True) -> GroundTruth:
    """Write the scenario's session folder into ``out_dir``."""
    gt, files = generate(scenario, alignment)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, data in files.items():
            (out / name).write_bytes(data)
    except OSError as e:
        raise IoFailure(f"cannot write session to {out}: {e}") from e
    return gt


# --------------------------------------------------------------------------
# brute-force alignment oracle

def oracle_alignment(streams: Sequence[tuple[StreamMeta, ClockModel]], rate_hz: float) -> dict:
    """Exhaustive nearest-frame table on the uniform frame reconstruction.

    Every frame time is materialised and mapped one by one; each tick takes
    the global argmin of |frame - tick| with near-ties going to the lower
    index. Poses streams bound the window but get no column.
    """
    per_stream = []
    for s, clock in streams:
        n = s.total_frames
        span = s.last_ts_ms - s.first_ts_ms
        # offsets from the first frame stay small, so they carry no epoch rounding
        rel = np.array([i * (span / (n - 1)) * clock.scale if n > 1 else 0.0 for i in range(n)])
        per_stream.append((s, float(apply_clock(clock, s.first_ts_ms)),
                           float(apply_clock(clock, s.last_ts_ms)), rel))
    start = max(c0 for _, c0, _, _ in per_stream)
    end = min(c1 for _, _, c1, _ in per_stream)
    if start > end:
        return {"rate_hz": rate_hz, "window": None, "frames": {}}
    step = 1000.0 / rate_hz
    ticks = []
    k = 0
    while start + k * step <= end + 1e-6:
        ticks.append(start + k * step)
        k += 1
    ticks = np.array(ticks)
    table = {}
    for s, c0, _, rel in per_stream:
        if s.role is Role.POSES:
            continue
        err = np.abs((c0 - ticks)[:, None] + rel[None, :])
        best = err.min(axis=1, keepdims=True)
        table[s.file_name] = [int(v) for v in np.argmax(err <= best + TIE_EPS_MS, axis=1)]
    return {"rate_hz": rate_hz, "window": [float(start), float(end)], "frames": table}


# --------------------------------------------------------------------------
# randomized instances for round-trip checks

_LABELS = ("Internal Camera", "USB Camera 1", "USB Camera 2", "USB Camera 3", "Thermal Camera")
_EXTRA_KEYS = ("Encoder", "App version", "Resolution", "Bitrate", "Note")


def random_session_log(rng: np.random.Generator, dialect: Dialect | str) -> SessionLog:
    """A well-formed log in ``dialect``: 0-6 streams, optional unknown keys."""
    dialect = Dialect(dialect)
    start = int(rng.integers(1_500_000_000_000, 2_000_000_000_000))
    session_id = datetime.fromtimestamp(start / 1000.0, tz=timezone.utc).strftime("%Y%m%d_%H%M%S")
    n = int(rng.integers(0, 7))
    poses_at = int(rng.integers(0, n)) if n and rng.random() < 0.5 else -1
    streams = []
    for k in range(n):
        if k == poses_at:
            name, label = POSES_FILE, "Poses"
        else:
            label = _LABELS[int(rng.integers(0, len(_LABELS)))]
            name = f"cam{k}.{('mp4', 'mov', 'vrs')[int(rng.integers(0, 3))]}"
        first = start + int(rng.integers(-500, 500))
        span = int(rng.integers(0, 120_000))
        # occasionally inconsistent on purpose: the format must carry any integers
        dur = span if rng.random() < 0.9 else int(rng.integers(0, 10**6))
        extras = tuple((_EXTRA_KEYS[int(i)], f"v{int(rng.integers(0, 1000))}")
                       for i in rng.choice(len(_EXTRA_KEYS), int(rng.integers(0, 3)), replace=False))
        streams.append(StreamMeta(name, label, int(rng.integers(1, 10_000)), first, first + span, dur,
                                  extras=extras))
    extended = dialect is Dialect.EXTENDED
    header_extras = (("Device", f"unit-{int(rng.integers(0, 99))}"),) if rng.random() < 0.2 else ()
    return SessionLog(
        session_id=session_id,
        dialect=dialect,
        streams=tuple(streams),
        started_wallclock=_wallclock(start) if extended else None,
        ended_wallclock=_wallclock(start + 60_000) if extended else None,
        extras=header_extras,
    )


def random_pose_track(rng: np.random.Generator, n: int, rate_hz: float = 89.31) -> PoseTrack:
    """Quantized track of ``n`` samples with random positions and unit quaternions."""
    t0 = int(rng.integers(1_500_000_000_000, 2_000_000_000_000))
    t_ms = t0 + np.floor(np.arange(n) * 1000.0 / rate_hz).astype(np.int64)
    pos = rng.uniform(-2.0, 2.0, (n, 1 + 2 * N_JOINTS, 3))
    q = rng.normal(size=(n, 1 + 2 * N_JOINTS, 4))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    arr = np.round(np.concatenate([pos, q], axis=-1), 6)
    idx = np.cumsum(rng.integers(1, 3, n)) - 1
    return PoseTrack(tuple(
        PoseSample.from_array(int(i), int(t), a) for i, t, a in zip(idx, t_ms, arr)
    ))
