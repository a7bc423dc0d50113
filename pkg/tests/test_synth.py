from __future__ import annotations

import json

import numpy as np
import pytest

from egoalign.errors import IoFailure, UnknownProfile
from egoalign.logparse import parse_session_log
from egoalign.model import Dialect, Role, get_profile
from egoalign.mp4probe import probe_mp4
from egoalign.poseio import parse_pose_file
from egoalign.session import scan_session, validate_session
from egoalign.sync import apply_clock, fit_clock, group_anchors, parse_anchor_csv
from egoalign.synth import (
    PoseTrajectory,
    Scenario,
    generate,
    generate_session,
    load_ground_truth,
    uniform_deltas,
)


def test_scenario_validation():
    for bad in ({"duration_s": 0}, {"frame_drop_prob": 1.0}, {"timestamp_jitter_sigma_ms": -1}):
        with pytest.raises(ValueError):
            Scenario("quest3", **bad)
    with pytest.raises(UnknownProfile):
        generate(Scenario("nosuch"))


def test_determinism():
    sc = Scenario("quest3", duration_s=3, timestamp_jitter_sigma_ms=1.0, frame_drop_prob=0.05, seed=8)
    _, a = generate(sc)
    _, b = generate(sc)
    assert a == b
    _, c = generate(Scenario("quest3", duration_s=3, timestamp_jitter_sigma_ms=1.0, frame_drop_prob=0.05, seed=9))
    assert a != c


def test_pico_frame_count():
    gt, files = generate(Scenario("pico4ultra", duration_s=30, seed=1), alignment=False)
    s = gt.log.stream("internal.mp4")
    assert abs(s.total_frames - 2680) <= 1
    assert 29_900 <= s.duration_ms <= 30_100
    assert s.effective_fps == pytest.approx(89.31, rel=1e-3)
    track = parse_pose_file(files["poses.txt"].decode())
    assert len(track) == gt.log.poses_stream.total_frames


def test_avp_has_single_wrist_and_no_poses():
    gt, files = generate(Scenario("avp", duration_s=2))
    roles = [s.role for s in gt.log.streams]
    assert roles.count(Role.WRIST) == 1
    assert Role.POSES not in roles and "poses.txt" not in files
    assert gt.log.dialect is Dialect.EXTENDED


def test_dialect_and_files_per_profile():
    gt, files = generate(Scenario("android", duration_s=2))
    assert gt.log.dialect is Dialect.BASIC
    assert set(files) == {"log.txt", "internal.mp4", "usb1.mp4", "usb2.mp4", "anchors.csv", "ground_truth.json"}
    gt, files = generate(Scenario("aria", duration_s=2))
    assert gt.log.stream("internal.vrs").total_frames == 21
    assert "internal.vrs" not in files


def test_self_consistency():
    sc = Scenario("quest3", duration_s=5, timestamp_jitter_sigma_ms=2.0, frame_drop_prob=0.1, seed=4)
    gt, files = generate(sc)
    log = parse_session_log(files["log.txt"].decode())
    assert log == gt.log
    for s in log.streams:
        times = gt.frame_times[s.file_name]
        assert (s.first_ts_ms, s.last_ts_ms, s.total_frames) == (times[0], times[-1], len(times))
        assert s.duration_ms == times[-1] - times[0]
        assert times == sorted(times)
        if s.is_video:
            (tr,) = probe_mp4(files[s.file_name]).tracks
            assert tr.sample_count == s.total_frames
            assert tr.media_duration_ticks * 1000 // tr.media_timescale == s.duration_ms


def test_poses_follow_trajectory():
    gt, files = generate(Scenario("quest3", duration_s=2, clock_offset_ms=-55.0, clock_drift_ppm=40.0, seed=2))
    track = parse_pose_file(files["poses.txt"].decode())
    clock = gt.clocks["poses.txt"]
    want = gt.trajectory.evaluate(apply_clock(clock, track.times()))
    got = np.stack([s.to_array() for s in track])
    assert np.abs(got - want).max() <= 5e-7


def test_trajectory_joints_are_unit():
    traj = PoseTrajectory.random(np.random.default_rng(0), 0.0)
    t = np.linspace(0, 60_000, 500)
    arr = traj.evaluate(t)
    assert arr.shape == (500, 53, 7)
    assert np.abs(np.linalg.norm(arr[..., 3:], axis=-1) - 1).max() < 1e-12
    # transform 2 is the left hand's wrist joint, which rides the wrist motion itself
    assert np.allclose(arr[:, 2, :3], traj.wrists[0].position(t / 1000.0))
    assert np.allclose(arr[:, 2, 3:], traj.wrists[0].rotation(t / 1000.0))
    assert PoseTrajectory.from_dict(json.loads(json.dumps(traj.to_dict()))) == traj


def test_anchor_file_and_noiseless_closure():
    gt, files = generate(Scenario("quest3", duration_s=3, clock_offset_ms=137.0, clock_drift_ppm=20.0, seed=5))
    anchors = parse_anchor_csv(files["anchors.csv"].decode())
    assert len(anchors) == 4 * 20
    for sid, group in group_anchors(anchors).items():
        model, _ = fit_clock(group)
        truth = gt.clocks[sid]
        assert model.t0_ms == truth.t0_ms
        assert model.offset_ms == pytest.approx(truth.offset_ms, abs=1e-6)
        assert model.drift_ppm == pytest.approx(truth.drift_ppm, abs=1e-6)


def test_ground_truth_file(tmp_path):
    gt = generate_session(Scenario("quest3", duration_s=2, seed=7), tmp_path)
    loaded = load_ground_truth(tmp_path / "ground_truth.json")
    assert loaded["clocks"] == gt.clocks
    assert loaded["trajectory"] == gt.trajectory
    assert loaded["anchors"] == gt.anchors
    assert loaded["alignment"]["frames"] == gt.alignment["frames"]
    assert set(loaded["alignment"]["frames"]) == {"internal.mp4", "usb1.mp4", "usb2.mp4"}


def test_generated_folder_scans(tmp_path):
    generate_session(Scenario("quest3", duration_s=10, seed=7), tmp_path)
    session = scan_session(tmp_path)
    assert [s.file_name for s in session.streams] == ["internal.mp4", "usb1.mp4", "usb2.mp4", "poses.txt"]
    assert session.pose_track is not None
    assert len(session.pose_track) == session.log.poses_stream.total_frames


@pytest.mark.parametrize("device", ["android", "aria", "iphone_android", "iphone_ipad", "avp", "quest3", "pico4ultra"])
def test_every_profile_validates_clean(tmp_path, device):
    sc = Scenario(device, duration_s=3, timestamp_jitter_sigma_ms=0.5, frame_drop_prob=0.01, seed=3)
    generate_session(sc, tmp_path)
    report = validate_session(scan_session(tmp_path))
    assert not report.has_errors, report.errors
    bound = validate_session(scan_session(tmp_path, get_profile(device)))
    assert not bound.has_errors, bound.errors


def test_uniform_deltas():
    assert uniform_deltas(763, 25406) == [(763 - 25406 % 763, 33), (25406 % 763, 34)]
    assert uniform_deltas(4, 8) == [(4, 2)]
    with pytest.raises(ValueError):
        uniform_deltas(5, 4)


def test_io_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure):
        generate_session(Scenario("android", duration_s=1), blocker / "sub")
