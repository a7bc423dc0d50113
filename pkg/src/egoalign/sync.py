"""Per-stream clock corrections fitted from anchor observations.

An anchor pairs a stream's own timestamp with a reading of a shared reference
clock (for instance a millisecond timer on screen that every camera films).
The correction is affine::

    ref(ts) = ts + offset_ms + drift_ppm * (ts - t0_ms) / 1e6
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateTimes,
    EmptyAnchors,
    InsufficientAnchors,
    ParseError,
    StreamMismatch,
)

log = logging.getLogger(__name__)

ANCHOR_HEADER = ("stream", "ts_ms", "ref_ms")
MIN_RECOMMENDED_ANCHORS = 3


class FitMode(str, Enum):
    OFFSET_ONLY = "offset_only"
    OFFSET_DRIFT = "offset_drift"


@dataclass(frozen=True)
class AnchorObservation:
    """``ref_ts_ms`` may be an int, float or Decimal.

    Decimals keep sub-millisecond reference readings exact at epoch
    magnitudes, where a float only resolves about 0.25 us.
    """

    stream_id: str
    stream_ts_ms: int
    ref_ts_ms: int | float | Decimal


@dataclass(frozen=True)
class ClockModel:
    stream_id: str
    offset_ms: float = 0.0
    drift_ppm: float = 0.0
    t0_ms: int = 0

    @classmethod
    def identity(cls, stream_id: str) -> "ClockModel":
        return cls(stream_id)

    @property
    def scale(self) -> float:
        return 1.0 + self.drift_ppm * 1e-6

    def to_dict(self) -> dict:
        return {"offset_ms": self.offset_ms, "drift_ppm": self.drift_ppm, "t0_ms": self.t0_ms}


@dataclass(frozen=True)
class ResidualStats:
    max_abs_ms: float
    rms_ms: float
    count: int

    def to_dict(self) -> dict:
        return {"max_abs_ms": self.max_abs_ms, "rms_ms": self.rms_ms, "count": self.count}


def apply_clock(model: ClockModel, ts_ms):
    """Map device timestamp(s) to the reference clock."""
    if isinstance(ts_ms, np.ndarray):
        rel = (ts_ms - model.t0_ms).astype(float)
        return ts_ms.astype(float) + model.offset_ms + model.drift_ppm * rel / 1e6
    return ts_ms + model.offset_ms + model.drift_ppm * (ts_ms - model.t0_ms) / 1e6


def invert_clock(model: ClockModel, ref_ms: float) -> float:
    """Device timestamp that maps to ``ref_ms``."""
    return model.t0_ms + (ref_ms - model.t0_ms - model.offset_ms) / model.scale


def _residuals(model: ClockModel, ts: np.ndarray, lag: np.ndarray) -> np.ndarray:
    rel = (ts - model.t0_ms).astype(float)
    return lag - model.offset_ms - model.drift_ppm * rel / 1e6


def _stats(res: np.ndarray) -> ResidualStats:
    return ResidualStats(
        max_abs_ms=float(np.max(np.abs(res))),
        rms_ms=float(np.sqrt(np.mean(res * res))),
        count=int(res.size),
    )


def _arrays(anchors: Sequence[AnchorObservation]) -> tuple[np.ndarray, np.ndarray]:
    """Device timestamps and lags ``ref - ts``, the latter formed exactly."""
    ts = np.array([a.stream_ts_ms for a in anchors], dtype=np.int64)
    lag = np.array([float(Fraction(a.ref_ts_ms) - a.stream_ts_ms) for a in anchors])
    return ts, lag


def fit_clock(
    anchors: Sequence[AnchorObservation],
    mode: FitMode | str = FitMode.OFFSET_DRIFT,
) -> tuple[ClockModel, ResidualStats]:
    """Fit one stream's clock model.

    ``offset_only`` takes the median of ``ref - ts`` so that a minority of
    misread timer values cannot drag the fit. ``offset_drift`` is ordinary
    least squares with the drift origin at the earliest anchor.
    """
    mode = FitMode(mode)
    anchors = list(anchors)
    need = 1 if mode is FitMode.OFFSET_ONLY else 2
    if len(anchors) < need:
        raise InsufficientAnchors(f"{mode.value} needs at least {need} anchors, got {len(anchors)}")
    ids = {a.stream_id for a in anchors}
    if len(ids) != 1:
        raise StreamMismatch(f"anchors span several streams: {sorted(ids)}")
    stream_id = ids.pop()
    if len(anchors) < MIN_RECOMMENDED_ANCHORS:
        log.warning("stream %s: only %d anchors, %d or more recommended",
                    stream_id, len(anchors), MIN_RECOMMENDED_ANCHORS)

    ts, y = _arrays(anchors)
    t0 = int(ts.min())
    if mode is FitMode.OFFSET_ONLY:
        model = ClockModel(stream_id, float(np.median(y)), 0.0, t0)
    else:
        x = (ts - t0).astype(float)
        xc = x - x.mean()
        sxx = float(xc @ xc)
        if sxx == 0.0:
            raise DegenerateTimes(f"stream {stream_id}: all anchors share one timestamp")
        slope = float(xc @ (y - y.mean())) / sxx
        offset = float(y.mean() - slope * x.mean())
        model = ClockModel(stream_id, offset, slope * 1e6, t0)
    return model, _stats(_residuals(model, ts, y))


def clock_residuals(model: ClockModel, anchors: Sequence[AnchorObservation]) -> ResidualStats:
    anchors = list(anchors)
    if not anchors:
        raise EmptyAnchors("no anchors")
    bad = {a.stream_id for a in anchors if a.stream_id != model.stream_id}
    if bad:
        raise StreamMismatch(f"anchors for {sorted(bad)} do not match model {model.stream_id!r}")
    return _stats(_residuals(model, *_arrays(anchors)))


def group_anchors(anchors: Iterable[AnchorObservation]) -> dict[str, list[AnchorObservation]]:
    groups: dict[str, list[AnchorObservation]] = {}
    for a in anchors:
        groups.setdefault(a.stream_id, []).append(a)
    return dict(sorted(groups.items()))


def fit_all(anchors: Iterable[AnchorObservation], mode=FitMode.OFFSET_DRIFT):
    return {sid: fit_clock(group, mode) for sid, group in group_anchors(anchors).items()}


def rebase_clocks(models: Mapping[str, ClockModel], reference: str) -> dict[str, ClockModel]:
    """Re-express every model relative to ``reference``'s clock.

    Afterwards ``reference`` maps to identity and every other stream maps into
    the reference stream's device time.
    """
    ref = models[reference]
    a_r, b_r = ref.scale, ref.offset_ms - ref.drift_ppm * ref.t0_ms / 1e6
    out = {}
    for sid, m in models.items():
        a_s, b_s = m.scale, m.offset_ms - m.drift_ppm * m.t0_ms / 1e6
        a, b = a_s / a_r, (b_s - b_r) / a_r
        out[sid] = ClockModel(sid, a * m.t0_ms + b - m.t0_ms, (a - 1.0) * 1e6, m.t0_ms)
    out[reference] = ClockModel(reference, 0.0, 0.0, ref.t0_ms)
    return out


def parse_anchor_csv(text: str) -> list[AnchorObservation]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty anchor file", line=1) from None
    if tuple(h.strip() for h in header) != ANCHOR_HEADER:
        raise ParseError(f"header must be {','.join(ANCHOR_HEADER)}, got {','.join(header)}", line=1)
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", line=lineno)
        sid, ts, ref = (c.strip() for c in row)
        try:
            ts_i = int(ts)
        except ValueError:
            raise ParseError(f"ts_ms must be an integer, got {ts!r}", line=lineno, column=1) from None
        try:
            ref_d = Decimal(ref)
        except InvalidOperation:
            raise ParseError(f"ref_ms must be a number, got {ref!r}", line=lineno, column=2) from None
        if not sid or not ref_d.is_finite():
            raise ParseError("empty stream id or non-finite ref_ms", line=lineno)
        out.append(AnchorObservation(sid, ts_i, int(ref_d) if ref_d == ref_d.to_integral_value() else ref_d))
    return out


def _fmt_ref(v) -> str:
    if isinstance(v, float):
        return str(int(v)) if v.is_integer() else repr(v)
    return str(v)


def format_anchor_csv(anchors: Iterable[AnchorObservation]) -> str:
    lines = [",".join(ANCHOR_HEADER)]
    lines.extend(f"{a.stream_id},{a.stream_ts_ms},{_fmt_ref(a.ref_ts_ms)}" for a in anchors)
    return "\n".join(lines) + "\n"


def read_anchor_csv(path) -> list[AnchorObservation]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_anchor_csv(fh.read())


def write_anchor_csv(path, anchors: Iterable[AnchorObservation]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_anchor_csv(anchors))


def clocks_to_json(models: Mapping[str, ClockModel]) -> dict:
    return {sid: m.to_dict() for sid, m in sorted(models.items())}


def clocks_from_json(obj: Mapping) -> dict[str, ClockModel]:
    return {
        sid: ClockModel(sid, float(v["offset_ms"]), float(v["drift_ppm"]), int(v["t0_ms"]))
        for sid, v in obj.items()
    }
