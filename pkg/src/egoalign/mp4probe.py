"""Metadata-only MP4/MOV walker.

Only ``mvhd``, ``mdhd`` and ``stts`` are interpreted. Every read is checked
against the enclosing box, so damaged input raises :class:`ProbeError`
instead of reading past a boundary.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import (
    BadVersion,
    FragmentedUnsupported,
    MissingBox,
    NoMoov,
    SizeOverrun,
    Truncated,
    ZeroSize,
)
from .model import Finding, Severity, StreamMeta, finding


@dataclass(frozen=True)
class BoxHeader:
    box_type: str
    payload_size: int
    header_len: int
    offset: int = 0

    @property
    def payload_start(self) -> int:
        return self.offset + self.header_len

    @property
    def end(self) -> int:
        return self.payload_start + self.payload_size


@dataclass(frozen=True)
class TrackMeta:
    media_timescale: int
    media_duration_ticks: int
    sample_count: int
    stts_entries: tuple[tuple[int, int], ...]

    @property
    def duration_ms(self) -> float:
        return self.media_duration_ticks * 1000.0 / self.media_timescale


@dataclass(frozen=True)
class Mp4Meta:
    movie_timescale: int
    movie_duration_ticks: int
    tracks: tuple[TrackMeta, ...]

    @property
    def duration_ms(self) -> float:
        return self.movie_duration_ticks * 1000.0 / self.movie_timescale


def read_box_header(buf: bytes, offset: int = 0, end: int | None = None) -> BoxHeader:
    """Decode the box header at ``offset``; the box must end by ``end``."""
    end = len(buf) if end is None else end
    if offset < 0 or offset + 8 > end:
        raise Truncated(f"box header at {offset} needs 8 bytes, {max(end - offset, 0)} left")
    size, = struct.unpack_from(">I", buf, offset)
    box_type = bytes(buf[offset + 4:offset + 8]).decode("latin-1")
    header_len = 8
    if size == 1:
        if offset + 16 > end:
            raise Truncated(f"{box_type!r} largesize at {offset} truncated")
        size, = struct.unpack_from(">Q", buf, offset + 8)
        header_len = 16
    elif size == 0:
        raise ZeroSize(f"{box_type!r} at {offset} extends to end of file (size 0 unsupported)")
    if size < header_len:
        raise SizeOverrun(f"{box_type!r} at {offset} declares size {size} < header {header_len}")
    if offset + size > end:
        raise SizeOverrun(f"{box_type!r} at {offset} size {size} runs past {end}")
    return BoxHeader(box_type, size - header_len, header_len, offset)


def iter_boxes(buf: bytes, start: int, end: int):
    off = start
    while off < end:
        h = read_box_header(buf, off, end)
        yield h
        off = h.end


def _child(buf: bytes, parent: BoxHeader, box_type: str) -> BoxHeader:
    for h in iter_boxes(buf, parent.payload_start, parent.end):
        if h.box_type == box_type:
            return h
    raise MissingBox(f"{parent.box_type!r} has no {box_type!r}")


def _unpack(fmt: str, buf: bytes, off: int, box: BoxHeader):
    if off + struct.calcsize(fmt) > box.end:
        raise Truncated(f"{box.box_type!r} payload too short")
    return struct.unpack_from(fmt, buf, off)


def _full_box_version(buf: bytes, box: BoxHeader) -> tuple[int, int]:
    version_flags, = _unpack(">I", buf, box.payload_start, box)
    return version_flags >> 24, box.payload_start + 4


def _timescale_duration(buf: bytes, box: BoxHeader) -> tuple[int, int]:
    # mvhd and mdhd share the version 0/1 layout of their leading fields
    version, off = _full_box_version(buf, box)
    if version == 0:
        _, _, timescale, duration = _unpack(">IIII", buf, off, box)
    elif version == 1:
        _, _, timescale, duration = _unpack(">QQIQ", buf, off, box)
    else:
        raise BadVersion(f"{box.box_type!r} version {version} not in (0, 1)")
    if timescale == 0:
        raise BadVersion(f"{box.box_type!r} timescale is zero")
    return timescale, duration


def _stts(buf: bytes, box: BoxHeader) -> tuple[tuple[int, int], ...]:
    version, off = _full_box_version(buf, box)
    if version != 0:
        raise BadVersion(f"'stts' version {version} not 0")
    count, = _unpack(">I", buf, off, box)
    off += 4
    if off + 8 * count > box.end:
        raise Truncated(f"'stts' declares {count} entries, room for {(box.end - off) // 8}")
    return tuple(struct.unpack_from(">II", buf, off + 8 * i) for i in range(count))


def _track(buf: bytes, trak: BoxHeader) -> TrackMeta:
    mdia = _child(buf, trak, "mdia")
    timescale, duration = _timescale_duration(buf, _child(buf, mdia, "mdhd"))
    stbl = _child(buf, _child(buf, mdia, "minf"), "stbl")
    entries = _stts(buf, _child(buf, stbl, "stts"))
    return TrackMeta(timescale, duration, sum(c for c, _ in entries), entries)


def probe_mp4(buf: bytes) -> Mp4Meta:
    moov = None
    for h in iter_boxes(buf, 0, len(buf)):
        if h.box_type == "moof":
            raise FragmentedUnsupported("fragmented MP4 ('moof') is not supported")
        if h.box_type == "moov" and moov is None:
            moov = h
    if moov is None:
        raise NoMoov("no 'moov' box")

    mvhd = None
    tracks = []
    for h in iter_boxes(buf, moov.payload_start, moov.end):
        if h.box_type == "mvhd":
            mvhd = h
        elif h.box_type == "mvex":
            raise FragmentedUnsupported("fragmented MP4 ('mvex') is not supported")
        elif h.box_type == "trak":
            tracks.append(_track(buf, h))
    if mvhd is None:
        raise MissingBox("'moov' has no 'mvhd'")
    timescale, duration = _timescale_duration(buf, mvhd)
    return Mp4Meta(timescale, duration, tuple(tracks))


def probe_file(path) -> Mp4Meta:
    with open(path, "rb") as fh:
        return probe_mp4(fh.read())


def cross_check_mp4(meta: Mp4Meta, stream: StreamMeta, dur_tol_ms: int = 100) -> list[Finding]:
    findings = []
    name = stream.file_name
    for i, tr in enumerate(meta.tracks):
        if tr.sample_count != stream.total_frames:
            findings.append(finding(
                Severity.ERROR, "MP4_FRAMES", name,
                f"track {i} has {tr.sample_count} samples, log declares {stream.total_frames}",
            ))
        diff = abs(tr.duration_ms - stream.duration_ms)
        if diff > dur_tol_ms:
            findings.append(finding(
                Severity.WARNING, "MP4_DURATION", name,
                f"track {i} lasts {tr.duration_ms:.1f} ms, log declares {stream.duration_ms} ms",
            ))
    return findings
