from __future__ import annotations

import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from egoalign.errors import BadInteger, DialectMismatch, MalformedBlock, MissingHeader, ParseError
from egoalign.logparse import parse_session_log, serialize_session_log
from egoalign.model import Dialect, Role, SessionLog
from egoalign.synth import random_session_log

ANDROID_FIELDS = {
    "internal.mp4": ("Internal Camera", 763, 1778531115762, 1778531141168, 25406),
    "usb2.mp4": ("USB Camera 2", 483, 1778531115740, 1778531141551, 25811),
    "usb1.mp4": ("USB Camera 1", 473, 1778531115784, 1778531141589, 25805),
}
HEADSET_FIELDS = {
    "internal.mp4": ("Internal Camera", 2623, 1778528808577, 1778528838419, 29842),
    "usb1.mp4": ("USB Camera 1", 600, 1778528808675, 1778528838294, 29619),
    "usb2.mp4": ("USB Camera 2", 540, 1778528808725, 1778528838357, 29632),
    "poses.txt": ("Poses", 2622, 1778528808795, 1778528838153, 29358),
}


def _fields(log: SessionLog) -> dict:
    return {s.file_name: (s.source_label, s.total_frames, s.first_ts_ms, s.last_ts_ms, s.duration_ms)
            for s in log.streams}


def test_basic_dialect_sample(android_log_text):
    log = parse_session_log(android_log_text)
    assert log.session_id == "20260511_162515"
    assert log.dialect is Dialect.BASIC
    assert log.started_wallclock is None
    assert _fields(log) == ANDROID_FIELDS
    assert [s.file_name for s in log.streams] == ["internal.mp4", "usb2.mp4", "usb1.mp4"]


def test_extended_dialect_sample(headset_log_text):
    log = parse_session_log(headset_log_text)
    assert log.session_id == "20260512_044648"
    assert log.dialect is Dialect.EXTENDED
    assert log.started_wallclock == "2026-05-12 04:46:48.572"
    assert log.ended_wallclock == "2026-05-12 04:47:18.443"
    assert _fields(log) == HEADSET_FIELDS
    assert log.poses_stream.role is Role.POSES


@pytest.mark.parametrize("fixture", ["android_log_text", "headset_log_text"])
def test_sample_round_trip(fixture, request):
    log = parse_session_log(request.getfixturevalue(fixture))
    assert parse_session_log(serialize_session_log(log, log.dialect)) == log


def test_serializer_uses_sample_spellings(headset_log_text):
    text = serialize_session_log(parse_session_log(headset_log_text))
    # the canonical writer reproduces the sample's lines, not just its values
    assert [ln for ln in text.splitlines() if ln] == [ln.rstrip() for ln in headset_log_text.splitlines() if ln.strip()]


def test_header_only():
    log = parse_session_log("Recording Session: 20260511_162515\n")
    assert log.streams == ()
    text = serialize_session_log(log, Dialect.BASIC)
    assert text == "Recording Session: 20260511_162515\n" + "=" * 32 + "\n"
    assert parse_session_log(text) == log


def test_extended_needs_wallclock(android_log_text):
    with pytest.raises(DialectMismatch):
        serialize_session_log(parse_session_log(android_log_text), Dialect.EXTENDED)


def test_dialect_from_unix_ms_key_alone():
    text = ("Recording Session: 20260511_162515\nFile: a.mp4\nSource: Internal Camera\nTotal frames: 2\n"
            "First frame timestamp (unix ms): 10\nLast frame timestamp: 20 ms\nDuration: 10 ms\n")
    assert parse_session_log(text).dialect is Dialect.EXTENDED


def test_field_order_is_free(android_log_text):
    lines = android_log_text.splitlines()
    block = lines[4:9]
    shuffled = lines[:4] + block[::-1] + lines[9:]
    assert parse_session_log("\n".join(shuffled)) == parse_session_log(android_log_text)


def test_unknown_keys_preserved():
    text = ("Recording Session: 20260511_162515\nApp: 1.2\n====\nFile: a.mp4\nSource: USB Camera 1\n"
            "Encoder: hevc\nTotal frames: 2\nFirst frame timestamp: 10 ms\nLast frame timestamp: 20 ms\n"
            "Duration: 10 ms\n")
    log = parse_session_log(text)
    assert log.extras == (("App", "1.2"),)
    assert log.streams[0].extras == (("Encoder", "hevc"),)
    assert parse_session_log(serialize_session_log(log)) == log


@pytest.mark.parametrize("text,err,line", [
    ("File: a.mp4\n", MissingHeader, 1),
    ("", MissingHeader, None),
    ("Recording Session: 20260511_162515\nFile: a.mp4\nSource: x\n", MalformedBlock, 2),
    ("Recording Session: 20260511_162515\nFile: a.mp4\nTotal frames: many\n", BadInteger, 3),
    ("Recording Session: 20260511_162515\ngarbage line\n", MalformedBlock, 2),
])
def test_errors_carry_line_numbers(text, err, line):
    with pytest.raises(err) as info:
        parse_session_log(text)
    assert info.value.line == line
    if line is not None:
        assert f"line {line}" in str(info.value)


def test_duplicate_file_name(android_log_text):
    dup = android_log_text.replace("File: usb2.mp4", "File: internal.mp4")
    with pytest.raises(MalformedBlock) as info:
        parse_session_log(dup)
    assert info.value.line == 11


def test_large_integers_survive():
    big = 2**62 + 7
    text = (f"Recording Session: 20260511_162515\nFile: a.mp4\nSource: USB Camera 1\nTotal frames: 1\n"
            f"First frame timestamp: {big} ms\nLast frame timestamp: {big} ms\nDuration: 0 ms\n")
    assert parse_session_log(text).streams[0].first_ts_ms == big


@given(seed=st.integers(0, 2**32 - 1), dialect=st.sampled_from(list(Dialect)))
def test_round_trip_property(seed, dialect):
    log = random_session_log(np.random.default_rng(seed), dialect)
    assert parse_session_log(serialize_session_log(log, dialect)) == log


@given(
    pads=st.lists(st.integers(0, 6), min_size=40, max_size=40),
    blanks=st.lists(st.integers(0, 3), min_size=40, max_size=40),
)
def test_whitespace_robustness(headset_log_text, pads, blanks):
    out = []
    for i, line in enumerate(headset_log_text.splitlines()):
        if line.strip().startswith("File:"):
            out.extend([""] * blanks[i % 40])
        out.append(re.sub(r":\s*", ":" + " " * (1 + pads[i % 40]), line, count=1))
    assert parse_session_log("\n".join(out)) == parse_session_log(headset_log_text)


def test_parse_errors_are_value_errors():
    assert issubclass(ParseError, ValueError)
