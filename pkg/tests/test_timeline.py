from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from egoalign.errors import EmptyOverlap, EmptyTrack, NonUnitInput, NoStreams, OutOfRange
from egoalign.logparse import parse_session_log, serialize_session_log
from egoalign.model import Dialect, SessionLog, StreamMeta
from egoalign.poseio import JointPose, PoseSample, PoseTrack
from egoalign.session import scan_session
from egoalign.sync import ClockModel, apply_clock
from egoalign.synth import PoseTrajectory, axis_angle
from egoalign.timeline import (
    InterpMode,
    build_timeline,
    common_window,
    frame_times,
    interpolate_pose,
    nearest_frame,
    nearest_frames,
    slerp,
    tick_grid,
)

from .oracles import exhaustive_nearest, quat_angle_deg

INTERNAL = StreamMeta("internal.mp4", "Internal Camera", 763, 1778531115762, 1778531141168, 25406)
IDENT = ClockModel.identity("internal.mp4")
Q90Z = (0.0, 0.0, math.sin(math.pi / 4), math.cos(math.pi / 4))


def _stream(name, n, first, last):
    return StreamMeta(name, "USB Camera 1", n, first, last, last - first)


def test_sample_window(headset_log_text):
    log = parse_session_log(headset_log_text)
    window = common_window([(s, ClockModel.identity(s.file_name)) for s in log.streams])
    assert window == (1778528808795, 1778528838153)
    assert window[1] - window[0] == 29358


def test_single_stream_window():
    assert common_window([(INTERNAL, IDENT)]) == (INTERNAL.first_ts_ms, INTERNAL.last_ts_ms)


def test_disjoint_window():
    a = _stream("a", 10, 0, 1000)
    with pytest.raises(EmptyOverlap):
        common_window([(a, ClockModel.identity("a")), (a, ClockModel("a", 5000.0, 0.0, 0))])
    with pytest.raises(NoStreams):
        common_window([])


def test_nearest_frame_examples():
    assert nearest_frame(INTERNAL, IDENT, INTERNAL.first_ts_ms) == (0, 0.0)
    half = 25406 / 762 / 2
    idx, res = nearest_frame(INTERNAL, IDENT, INTERNAL.first_ts_ms + half)
    # epoch-scale doubles resolve ~0.24 us, so the query itself is rounded
    assert idx == 0 and abs(res) == pytest.approx(half, abs=1e-3)
    # outside the stream: clamp, residual reported honestly
    assert nearest_frame(INTERNAL, IDENT, INTERNAL.first_ts_ms - 1000) == (0, 1000.0)
    idx, res = nearest_frame(INTERNAL, IDENT, INTERNAL.last_ts_ms + 50)
    assert idx == 762 and res == pytest.approx(-50.0)


def test_single_frame_stream():
    s = _stream("one", 1, 500, 500)
    assert nearest_frame(s, ClockModel.identity("one"), 520.0) == (0, -20.0)


@given(
    n=st.integers(1, 400),
    first=st.integers(10**12, 2 * 10**12),
    span=st.integers(0, 60_000),
    offset=st.floats(-1000, 1000),
    drift=st.floats(-200, 200),
    seed=st.integers(0, 2**32 - 1),
)
def test_nearest_matches_exhaustive_argmin(n, first, span, offset, drift, seed):
    s = _stream("s", n, first, first + span)
    clock = ClockModel("s", offset, drift, first)
    c0 = float(apply_clock(clock, first))
    # frame and query times relative to the first corrected frame keep full precision
    rel = np.array([i * (span / (n - 1)) * clock.scale if n > 1 else 0.0 for i in range(n)])
    rng = np.random.default_rng(seed)
    t = c0 + rng.uniform(-100, rel[-1] + 100, 50)
    idx, res = nearest_frames(s, clock, t)
    assert np.allclose(frame_times(s, clock), c0 + rel, atol=1e-3)
    for k in range(t.size):
        assert idx[k] == exhaustive_nearest(rel, t[k] - c0)
        assert res[k] == pytest.approx(rel[idx[k]] - (t[k] - c0), abs=1e-6)


def test_slerp_examples():
    ident = (0.0, 0.0, 0.0, 1.0)
    mid = slerp(ident, Q90Z, 0.5)
    assert np.allclose(mid, (0, 0, 0.3826834, 0.9238795), atol=1e-6)
    q = np.array([0.1, -0.2, 0.3, 0.9])
    q /= np.linalg.norm(q)
    for u in (0.0, 0.3, 1.0):
        assert np.allclose(slerp(q, q, u), q, atol=1e-12)
    with pytest.raises(NonUnitInput):
        slerp((0, 0, 0, 1.1), ident, 0.5)


def _unit_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


@given(seed=st.integers(0, 2**32 - 1), u=st.floats(0, 1))
def test_slerp_laws(seed, u):
    rng = np.random.default_rng(seed)
    q0, q1 = _unit_quats(rng, 2)
    a = slerp(q0, q1, u)
    b = slerp(q0, -q1, u)
    assert np.allclose(a, b, atol=1e-9) or np.allclose(a, -b, atol=1e-9)
    assert abs(np.linalg.norm(a) - 1.0) <= 1e-9
    # constant angular speed: the angle from q0 is u times the full arc
    assert quat_angle_deg(q0, a) == pytest.approx(u * quat_angle_deg(q0, q1), abs=1e-5)
    assert np.allclose(slerp(q0, q1, 0.0), q0, atol=1e-9)


def test_slerp_batched():
    rng = np.random.default_rng(1)
    q0, q1, u = _unit_quats(rng, 8), _unit_quats(rng, 8), rng.uniform(0, 1, 8)
    batch = slerp(q0, q1, u)
    for k in range(8):
        assert np.allclose(batch[k], slerp(q0[k], q1[k], u[k]), atol=1e-12)


def _two_sample_track():
    a = PoseSample.identity(0, 0)
    b = PoseSample(1, 100, JointPose((1.0, 0.0, 0.0), Q90Z), a.left_hand, a.right_hand)
    return PoseTrack((a, b))


def test_interpolation_examples():
    track = _two_sample_track()
    clock = ClockModel.identity("poses.txt")
    s = interpolate_pose(track, clock, 25.0, idx=4)
    assert s.head.position == pytest.approx((0.25, 0.0, 0.0))
    assert (s.idx, s.t_ms) == (4, 25)
    mid = interpolate_pose(track, clock, 50.0)
    assert np.allclose(mid.head.rotation, (0, 0, 0.3826834, 0.9238795), atol=1e-6)
    assert interpolate_pose(track, clock, 100.0).head == track[1].head
    with pytest.raises(OutOfRange):
        interpolate_pose(track, clock, 101.0)
    assert interpolate_pose(track, clock, 101.0, InterpMode.CLAMP).head == track[1].head
    assert interpolate_pose(track, clock, -5.0, "clamp").head == track[0].head
    with pytest.raises(EmptyTrack):
        interpolate_pose(PoseTrack(), clock, 0.0)


def test_interpolation_uses_corrected_times():
    track = _two_sample_track()
    clock = ClockModel("poses.txt", 1000.0, 0.0, 0)
    assert interpolate_pose(track, clock, 1025.0).head.position == pytest.approx((0.25, 0.0, 0.0))


def test_interpolation_tracks_analytic_motion():
    rng = np.random.default_rng(9)
    traj = PoseTrajectory.random(rng, 0.0)
    t = np.floor(np.arange(400) * 1000 / 89.31).astype(np.int64)
    track = PoseTrack(tuple(PoseSample.from_array(i, int(v), a)
                            for i, (v, a) in enumerate(zip(t, traj.evaluate(t.astype(float))))))
    q = rng.uniform(t[0], t[-1], 200)
    got = np.stack([interpolate_pose(track, ClockModel.identity("p"), float(x)).to_array() for x in q])
    want = traj.evaluate(q)
    assert np.abs(got[..., :3] - want[..., :3]).max() <= 1e-4
    assert quat_angle_deg(got[..., 3:], want[..., 3:]).max() <= 0.1
    assert np.abs(np.linalg.norm(got[..., 3:], axis=-1) - 1).max() <= 1e-9


def test_tick_grid():
    ticks = tick_grid((0.0, 1000.0), 30.0)
    assert ticks.size == 31
    assert ticks[7] == 0.0 + 7 * (1000.0 / 30.0)
    assert tick_grid((5.0, 5.0), 30.0).tolist() == [5.0]
    with pytest.raises(ValueError):
        tick_grid((0.0, 1.0), 0.0)


def test_sample_timeline(headset_log_dir):
    tl = build_timeline(scan_session(headset_log_dir), rate_hz=30)
    assert tl.window == (1778528808795, 1778528838153)
    assert tl.tick_count == 881 == math.floor(29.358 * 30) + 1
    assert set(tl.streams) == {"internal.mp4", "usb1.mp4", "usb2.mp4"}
    assert tl.resampled_poses is None
    for a in tl.streams.values():
        assert np.all(np.diff(a.frame_index) >= 0)
        assert np.abs(a.residual_ms).max() <= a.tolerance_ms + 1e-6
        assert not a.out_of_tolerance.any()


def test_own_rate_single_stream(tmp_path):
    s = _stream("usb1.mp4", 301, 1_000_000, 1_010_000)
    (tmp_path / "log.txt").write_text(serialize_session_log(
        SessionLog("20260511_162515", Dialect.BASIC, (s,))))
    tl = build_timeline(scan_session(tmp_path))
    a = tl.streams["usb1.mp4"]
    assert tl.tick_count == 301
    assert a.frame_index.tolist() == list(range(301))
    assert np.abs(a.residual_ms).max() <= 1e-6


def test_clock_equivariance(pico_session):
    root, gt = pico_session
    session = scan_session(root)
    base = build_timeline(session, gt.clocks, rate_hz=20.0)
    shifted = dict(gt.clocks)
    c = gt.clocks["usb1.mp4"]
    # shift one stream's device clock by 400 ms, consistently in its clock model
    shifted["usb1.mp4"] = ClockModel(c.stream_id, c.offset_ms - 400.0, c.drift_ppm, c.t0_ms)
    streams = tuple(replace(s, first_ts_ms=s.first_ts_ms + 400, last_ts_ms=s.last_ts_ms + 400)
                    if s.file_name == "usb1.mp4" else s for s in session.log.streams)
    session2 = replace(session, log=replace(session.log, streams=streams))
    again = build_timeline(session2, shifted, rate_hz=20.0)
    assert again.tick_count == base.tick_count
    for sid in base.streams:
        assert again.streams[sid].frame_index.tolist() == base.streams[sid].frame_index.tolist()


def test_generated_timeline_matches_oracle(pico_session):
    root, gt = pico_session
    tl = build_timeline(scan_session(root), gt.clocks, gt.alignment["rate_hz"])
    assert list(tl.window) == pytest.approx(gt.alignment["window"], abs=1e-9)
    for sid, frames in gt.alignment["frames"].items():
        assert tl.streams[sid].frame_index.tolist() == frames


def test_resampled_poses(pico_session):
    root, gt = pico_session
    session = scan_session(root)
    tl = build_timeline(session, gt.clocks)
    poses = tl.resampled_poses
    assert len(poses) == tl.tick_count
    arr = np.stack([s.to_array() for s in poses])
    assert np.abs(np.linalg.norm(arr[..., 3:], axis=-1) - 1).max() <= 1e-9
    assert [s.idx for s in poses] == list(range(tl.tick_count))


def test_resampling_at_track_rate_reproduces_track():
    # track sampled exactly every 10 ms; window starts on a sample
    rng = np.random.default_rng(2)
    traj = PoseTrajectory.random(rng, 0.0)
    t = np.arange(50) * 10
    samples = tuple(PoseSample.from_array(i, int(v), a)
                    for i, (v, a) in enumerate(zip(t, traj.evaluate(t.astype(float)))))
    track = PoseTrack(samples)
    clock = ClockModel.identity("poses.txt")
    ticks = tick_grid((0.0, 490.0), 100.0)
    for k, tk in enumerate(ticks):
        assert interpolate_pose(track, clock, float(tk), idx=k).transforms() == samples[k].transforms()


def test_axis_angle_helper():
    assert np.allclose(axis_angle(np.array([0, 0, 1.0]), math.pi / 2), Q90Z)
    assert apply_clock(IDENT, 5) == 5
