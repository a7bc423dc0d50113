"""``poses.txt``: per-frame head pose plus 26 OpenXR hand joints per hand.

Each data line holds ``idx t_ms`` followed by 53 transforms (head, then the
left hand's 26 joints, then the right hand's), each as ``px py pz qx qy qz qw``.
That is 2 + 53 * 7 = 373 whitespace separated fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadNumber,
    DecreasingTime,
    FieldCount,
    InvariantViolation,
    NonMonotonicIdx,
)
from .model import Finding, Severity, finding

HEADER_LINES = (
    "# idx t_ms head_pos(x y z) head_rot(x y z w) left[26]:(pos+rot) right[26]:(pos+rot)",
    "# joints in OpenXR XR_HAND_JOINT order: 0=Palm 1=Wrist 2..5=Thumb(M,P,D,T) "
    "6..10=Index(M,P,I,D,T) 11..15=Middle 16..20=Ring 21..25=Little",
)

JOINT_NAMES = (
    "palm", "wrist",
    "thumb_metacarpal", "thumb_proximal", "thumb_distal", "thumb_tip",
    "index_metacarpal", "index_proximal", "index_intermediate", "index_distal", "index_tip",
    "middle_metacarpal", "middle_proximal", "middle_intermediate", "middle_distal", "middle_tip",
    "ring_metacarpal", "ring_proximal", "ring_intermediate", "ring_distal", "ring_tip",
    "little_metacarpal", "little_proximal", "little_intermediate", "little_distal", "little_tip",
)
N_JOINTS = 26
N_TRANSFORMS = 1 + 2 * N_JOINTS
N_FIELDS = 2 + 7 * N_TRANSFORMS
POSES_FILE = "poses.txt"

IDENTITY_ROTATION = (0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class JointPose:
    position: tuple[float, float, float]
    rotation: tuple[float, float, float, float]  # x, y, z, w

    @classmethod
    def identity(cls) -> "JointPose":
        return cls((0.0, 0.0, 0.0), IDENTITY_ROTATION)


@dataclass(frozen=True)
class PoseSample:
    idx: int
    t_ms: int
    head: JointPose
    left_hand: tuple[JointPose, ...]
    right_hand: tuple[JointPose, ...]

    def transforms(self) -> tuple[JointPose, ...]:
        return (self.head,) + tuple(self.left_hand) + tuple(self.right_hand)

    def to_array(self) -> np.ndarray:
        """(53, 7) array, rows in file order."""
        return np.array([j.position + j.rotation for j in self.transforms()], dtype=float)

    @classmethod
    def from_array(cls, idx: int, t_ms: int, arr: np.ndarray) -> "PoseSample":
        rows = [
            JointPose(tuple(r[:3]), tuple(r[3:]))
            for r in np.asarray(arr, dtype=float).reshape(N_TRANSFORMS, 7).tolist()
        ]
        return cls(idx, t_ms, rows[0], tuple(rows[1:1 + N_JOINTS]), tuple(rows[1 + N_JOINTS:]))

    @classmethod
    def identity(cls, idx: int, t_ms: int) -> "PoseSample":
        ident = JointPose.identity()
        return cls(idx, t_ms, ident, (ident,) * N_JOINTS, (ident,) * N_JOINTS)


@dataclass(frozen=True)
class PoseTrack:
    samples: tuple[PoseSample, ...] = ()

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def times(self) -> np.ndarray:
        return np.array([s.t_ms for s in self.samples], dtype=np.int64)

    def check_invariants(self) -> None:
        prev = None
        for s in self.samples:
            if len(s.left_hand) != N_JOINTS or len(s.right_hand) != N_JOINTS:
                raise InvariantViolation(f"sample {s.idx}: each hand needs {N_JOINTS} joints")
            if not isinstance(s.t_ms, (int, np.integer)):
                raise InvariantViolation(f"sample {s.idx}: t_ms must be integer milliseconds")
            if s.idx < 0:
                raise InvariantViolation(f"negative idx {s.idx}")
            if prev is not None:
                if s.idx <= prev.idx:
                    raise InvariantViolation(f"idx {s.idx} after {prev.idx}")
                if s.t_ms < prev.t_ms:
                    raise InvariantViolation(f"t_ms {s.t_ms} after {prev.t_ms}")
            prev = s


def _parse_int(tok: str, line: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise BadNumber(f"expected an integer, got {tok!r}", line=line, column=col) from None


def parse_pose_file(text: str) -> PoseTrack:
    samples = []
    prev_idx = prev_t = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) != N_FIELDS:
            raise FieldCount(f"expected {N_FIELDS} fields, got {len(toks)}", line=lineno)
        idx = _parse_int(toks[0], lineno, 0)
        t_ms = _parse_int(toks[1], lineno, 1)
        if idx < 0:
            raise BadNumber(f"negative idx {idx}", line=lineno, column=0)
        try:
            values = np.array(toks[2:], dtype=float)
        except ValueError:
            for col, tok in enumerate(toks[2:], start=2):
                try:
                    float(tok)
                except ValueError:
                    raise BadNumber(f"bad number {tok!r}", line=lineno, column=col) from None
            raise
        if not np.all(np.isfinite(values)):
            col = 2 + int(np.argmin(np.isfinite(values)))
            raise BadNumber(f"non-finite value {toks[col]!r}", line=lineno, column=col)
        if prev_idx is not None:
            if idx <= prev_idx:
                raise NonMonotonicIdx(f"idx {idx} does not follow {prev_idx}", line=lineno)
            if t_ms < prev_t:
                raise DecreasingTime(f"t_ms {t_ms} is before {prev_t}", line=lineno)
        prev_idx, prev_t = idx, t_ms
        samples.append(PoseSample.from_array(idx, t_ms, values))
    return PoseTrack(tuple(samples))


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def format_sample(s: PoseSample) -> str:
    parts = [str(int(s.idx)), str(int(s.t_ms))]
    for j in s.transforms():
        parts.extend(_fmt(v) for v in j.position)
        parts.extend(_fmt(v) for v in j.rotation)
    return " ".join(parts)


def serialize_pose_file(track: PoseTrack) -> str:
    track.check_invariants()
    lines = list(HEADER_LINES)
    lines.extend(format_sample(s) for s in track.samples)
    return "\n".join(lines) + "\n"


def quantize(v: float) -> float:
    """Round to the 6 fractional digits the file format keeps."""
    return float(_fmt(v))


def quantize_track(track: PoseTrack) -> PoseTrack:
    return parse_pose_file(serialize_pose_file(track))


def read_pose_file(path) -> PoseTrack:
    with open(path, encoding="utf-8") as fh:
        return parse_pose_file(fh.read())


def transform_label(k: int) -> str:
    if k == 0:
        return "head"
    hand = "left" if k <= N_JOINTS else "right"
    return f"{hand}.{JOINT_NAMES[(k - 1) % N_JOINTS]}"


def validate_pose_track(
    track: PoseTrack,
    quat_tol: float = 1e-3,
    max_gap_factor: float = 3.0,
    nominal_rate_hz: float | None = None,
    stream: str = POSES_FILE,
) -> list[Finding]:
    findings: list[Finding] = []
    max_gap_ms = None if not nominal_rate_hz else max_gap_factor * 1000.0 / nominal_rate_hz
    prev = None
    for s in track.samples:
        arr = s.to_array()
        norms = np.linalg.norm(arr[:, 3:], axis=1)
        for k in np.flatnonzero(np.abs(norms - 1.0) > quat_tol):
            findings.append(finding(
                Severity.ERROR, "QUAT_NORM", stream,
                f"sample idx {s.idx}: {transform_label(int(k))} quaternion norm {norms[k]:.6f}",
            ))
        if prev is not None:
            if s.idx != prev.idx + 1:
                findings.append(finding(
                    Severity.WARNING, "IDX_GAP", stream,
                    f"idx jumps from {prev.idx} to {s.idx}",
                ))
            dt = s.t_ms - prev.t_ms
            if dt == 0:
                findings.append(finding(
                    Severity.INFO, "TIME_DUP", stream,
                    f"samples {prev.idx} and {s.idx} share t_ms {s.t_ms}",
                ))
            elif max_gap_ms is not None and dt > max_gap_ms:
                findings.append(finding(
                    Severity.WARNING, "TIME_GAP", stream,
                    f"{dt} ms between samples {prev.idx} and {s.idx} (limit {max_gap_ms:.1f} ms)",
                ))
        prev = s
    return findings
