"""Reader and canonical writer for session ``log.txt`` files.

Two dialects exist in the wild. The basic one (Android hosts)::

    Recording Session: 20260511_162515
    ================================

    File: internal.mp4
      Source: Internal Camera
      Total frames: 763
      First frame timestamp: 1778531115762 ms
      Last frame timestamp: 1778531141168 ms
      Duration: 25406 ms

and the extended one (headset hosts), which adds ``Started:``/``Ended:``
wall-clock lines and moves the units into the key, e.g.
``First frame timestamp (unix ms): 1778528808577``.

The reader accepts either spelling in either dialect, ignores blank lines,
separators and padding, and keeps unknown ``Key: value`` lines so the writer
can emit them again.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import BadInteger, DialectMismatch, MalformedBlock, MissingHeader
from .model import Dialect, SessionLog, StreamMeta

SEPARATOR = "=" * 32

_INT = re.compile(r"^([+-]?\d+)(?:\s*ms)?$")

# normalized key -> (block field, marks the extended dialect)
_BLOCK_KEYS = {
    "Source": ("source_label", False),
    "Total frames": ("total_frames", False),
    "First frame timestamp": ("first_ts_ms", False),
    "First frame timestamp (unix ms)": ("first_ts_ms", True),
    "Last frame timestamp": ("last_ts_ms", False),
    "Last frame timestamp (unix ms)": ("last_ts_ms", True),
    "Duration": ("duration_ms", False),
    "Duration (ms)": ("duration_ms", True),
}
_REQUIRED = ("source_label", "total_frames", "first_ts_ms", "last_ts_ms", "duration_ms")


@dataclass
class _Block:
    file_name: str
    line: int
    values: dict = field(default_factory=dict)
    extras: list = field(default_factory=list)

    def finish(self) -> StreamMeta:
        missing = [k for k in _REQUIRED if k not in self.values]
        if missing:
            raise MalformedBlock(
                f"block for {self.file_name!r} lacks {', '.join(missing)}", line=self.line
            )
        return StreamMeta(file_name=self.file_name, extras=tuple(self.extras), **self.values)


def _parse_int(value: str, lineno: int) -> int:
    m = _INT.match(value)
    if not m:
        raise BadInteger(f"expected an integer, got {value!r}", line=lineno)
    return int(m.group(1))


def parse_session_log(text: str) -> SessionLog:
    session_id = None
    started = ended = None
    header_extras: list[tuple[str, str]] = []
    blocks: list[_Block] = []
    seen_names: set[str] = set()
    extended = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or set(line) == {"="}:
            continue
        if ":" not in line:
            raise MalformedBlock(f"expected 'Key: value', got {line!r}", line=lineno)
        key, value = line.split(":", 1)
        key = " ".join(key.split())
        value = value.strip()

        if key == "File":
            if value in seen_names:
                raise MalformedBlock(f"duplicate file name {value!r}", line=lineno)
            if session_id is None:
                raise MissingHeader("'File:' block before 'Recording Session:'", line=lineno)
            seen_names.add(value)
            blocks.append(_Block(value, lineno))
            continue

        if not blocks:
            if key == "Recording Session":
                if session_id is not None:
                    raise MalformedBlock("repeated 'Recording Session:' line", line=lineno)
                session_id = value
            elif key == "Started":
                started = value
            elif key == "Ended":
                ended = value
            else:
                header_extras.append((key, value))
            continue

        block = blocks[-1]
        entry = _BLOCK_KEYS.get(key)
        if entry is None:
            if key in ("Recording Session", "Started", "Ended"):
                raise MalformedBlock(f"header key {key!r} inside a stream block", line=lineno)
            block.extras.append((key, value))
            continue
        name, marks_extended = entry
        if name in block.values:
            raise MalformedBlock(f"repeated {key!r} in block {block.file_name!r}", line=lineno)
        extended = extended or marks_extended
        block.values[name] = value if name == "source_label" else _parse_int(value, lineno)

    if session_id is None:
        raise MissingHeader("no 'Recording Session:' line")
    if started is not None or ended is not None:
        extended = True
    return SessionLog(
        session_id=session_id,
        dialect=Dialect.EXTENDED if extended else Dialect.BASIC,
        streams=tuple(b.finish() for b in blocks),
        started_wallclock=started,
        ended_wallclock=ended,
        extras=tuple(header_extras),
    )


def serialize_session_log(log: SessionLog, dialect: Dialect | str | None = None) -> str:
    """Write ``log`` in the requested dialect (defaults to its own)."""
    dialect = Dialect(dialect) if dialect is not None else log.dialect
    extended = dialect is Dialect.EXTENDED
    if extended and (log.started_wallclock is None or log.ended_wallclock is None):
        raise DialectMismatch("extended dialect needs both Started and Ended wall-clock lines")

    out = [f"Recording Session: {log.session_id}"]
    if extended:
        out.append(f"Started:  {log.started_wallclock}")
        out.append(f"Ended:    {log.ended_wallclock}")
    out.extend(f"{k}: {v}" for k, v in log.extras)
    out.append(SEPARATOR)

    for s in log.streams:
        out.append("")
        out.append(f"File: {s.file_name}")
        out.append(f"  Source: {s.source_label}")
        out.append(f"  Total frames: {s.total_frames}")
        if extended:
            out.append(f"  First frame timestamp (unix ms): {s.first_ts_ms}")
            out.append(f"  Last frame timestamp  (unix ms): {s.last_ts_ms}")
            out.append(f"  Duration (ms): {s.duration_ms}")
        else:
            out.append(f"  First frame timestamp: {s.first_ts_ms} ms")
            out.append(f"  Last frame timestamp: {s.last_ts_ms} ms")
            out.append(f"  Duration: {s.duration_ms} ms")
        out.extend(f"  {k}: {v}" for k, v in s.extras)
    return "\n".join(out) + "\n"


def read_session_log(path) -> SessionLog:
    with open(path, encoding="utf-8") as fh:
        return parse_session_log(fh.read())
