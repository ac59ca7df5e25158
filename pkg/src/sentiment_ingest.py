from __future__ import annotations

"""Per-comment sentiment triplets -> quantized opinion scores -> empirical distributions.

Input schema: header ``comment_id,neg,neu,pos``, one comment per line, UTF-8,
LF or CRLF line endings. The signed composite ``pos - neg`` is snapped to the
0.25 grid on [-1, 1] (midpoints go toward zero) and shifted by +1 onto the
integrated 0..2 scale.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.analysis import OpinionHistogram, counts_from_column, histogram
from src.errors import FormatError, InputDomainError

__all__ = [
    "GRID_STEP",
    "GRID",
    "SentimentRecord",
    "QuantizedOpinion",
    "RowDiagnostic",
    "ParseResult",
    "CoarseView",
    "parse_records",
    "quantize",
    "snap_to_grid",
    "quantize_opinions",
    "integrated_histogram",
    "empirical_distribution",
    "coarse_view",
    "component_histograms",
    "write_grid_histogram_csv",
    "read_grid_histogram_csv",
]

HEADER = ["comment_id", "neg", "neu", "pos"]
GRID_HEADER = ["grid_score", "integrated_score", "count"]
SUM_TOLERANCE = 1e-6

GRID_STEP = 0.25
GRID = np.arange(-4, 5) * GRID_STEP  # -1.0 ... 1.0
# One bin per integrated grid value 0.0, 0.25, ..., 2.0.
INTEGRATED_LO = -GRID_STEP / 2
INTEGRATED_HI = 2 + GRID_STEP / 2
INTEGRATED_BINS = GRID.size


class SentimentRecord(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    comment_id: str
    neg: float = Field(ge=0, le=1)
    neu: float = Field(ge=0, le=1)
    pos: float = Field(ge=0, le=1)

    @model_validator(mode="after")
    def _sums_to_one(self) -> "SentimentRecord":
        total = self.neg + self.neu + self.pos
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"neg + neu + pos = {total:.6g}, expected 1")
        return self


@dataclass(frozen=True)
class QuantizedOpinion:
    raw_score: float
    grid_score: float
    integrated_score: float


@dataclass(frozen=True)
class RowDiagnostic:
    line: int
    reason: str


@dataclass
class ParseResult:
    records: List[SentimentRecord] = field(default_factory=list)
    diagnostics: List[RowDiagnostic] = field(default_factory=list)


@dataclass(frozen=True)
class CoarseView:
    """Mass on the negative grid points, on zero, and on the positive grid points."""

    negative: int
    neutral: int
    positive: int


def parse_records(stream: Iterable[str], *, renormalize: bool = False) -> ParseResult:
    """Parse a sentiment CSV; bad rows are skipped and reported with their line number.

    With ``renormalize`` a triplet is divided by its sum before validation
    instead of being rejected for not summing to 1. Bytes that are not
    UTF-8 fail the whole file with FormatError.
    """

    reader = csv.reader(stream)
    try:
        result = _read_rows(reader, renormalize)
    except UnicodeDecodeError as exc:
        raise FormatError(f"input is not UTF-8 (after line {reader.line_num}): {exc.reason}") from exc

    for diag in result.diagnostics:
        logging.warning(f"[Ingest] Rejected line {diag.line}: {diag.reason}")
    logging.info(
        f"[Ingest] Parsed {len(result.records)} records, rejected {len(result.diagnostics)} rows"
    )
    return result


def _read_rows(reader, renormalize: bool) -> ParseResult:
    header = next(reader, None)
    if header and header[0].startswith("\ufeff"):
        header[0] = header[0][1:]
    if header is None or [h.strip() for h in header] != HEADER:
        raise FormatError(f"missing header line '{','.join(HEADER)}'")

    result = ParseResult()
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        line = reader.line_num

        if len(row) != len(HEADER):
            result.diagnostics.append(RowDiagnostic(line, f"expected 4 fields, got {len(row)}"))
            continue
        try:
            scores = [float(cell) for cell in row[1:]]
        except ValueError:
            result.diagnostics.append(RowDiagnostic(line, f"non-numeric score in {row[1:]}"))
            continue

        if renormalize:
            total = sum(scores)
            if total > 0 and math.isfinite(total):
                scores = [s / total for s in scores]

        try:
            record = SentimentRecord(comment_id=row[0], neg=scores[0], neu=scores[1], pos=scores[2])
        except ValidationError as exc:
            reason = "; ".join(err["msg"] for err in exc.errors())
            result.diagnostics.append(RowDiagnostic(line, reason))
            continue
        result.records.append(record)
    return result


def snap_to_grid(values: Sequence[float]) -> np.ndarray:
    """Nearest multiple of 0.25 within [-1, 1]; exact midpoints round toward zero."""

    # Rounding to 1e-12 absorbs decimal-parsing noise around the midpoints.
    scaled = np.round(np.asarray(values, dtype=np.float64), 12) / GRID_STEP
    steps = np.sign(scaled) * np.ceil(np.abs(scaled) - 0.5)
    return np.clip(steps, -4, 4) * GRID_STEP + 0.0


def quantize(record: SentimentRecord) -> QuantizedOpinion:
    """
    >>> quantize(SentimentRecord(comment_id="c", neg=0.2, neu=0.3, pos=0.5)).grid_score
    0.25
    """

    raw = record.pos - record.neg
    grid = float(snap_to_grid([raw])[0])
    return QuantizedOpinion(raw_score=raw, grid_score=grid, integrated_score=grid + 1.0)


def quantize_opinions(opinions: Sequence[float]) -> Tuple[np.ndarray, int]:
    """Clamp simulated opinions to [-1, 1] and snap them; returns (integrated scores, clamp count)."""

    values = np.asarray(opinions, dtype=np.float64)
    clamped = int(np.sum((values < -1.0) | (values > 1.0)))
    grid = snap_to_grid(np.clip(values, -1.0, 1.0))
    return grid + 1.0, clamped


def integrated_histogram(integrated_scores: Sequence[float]) -> OpinionHistogram:
    return histogram(integrated_scores, INTEGRATED_LO, INTEGRATED_HI, INTEGRATED_BINS)


def empirical_distribution(records: Sequence[SentimentRecord]) -> OpinionHistogram:
    """Histogram of integrated scores, one bin per grid point on the 0..2 scale."""

    if not records:
        raise InputDomainError("empirical_distribution needs at least one record")
    scores = [quantize(r).integrated_score for r in records]
    return integrated_histogram(scores)


def coarse_view(hist: OpinionHistogram) -> CoarseView:
    if hist.n_bins != INTEGRATED_BINS:
        raise InputDomainError(f"coarse view needs the {INTEGRATED_BINS}-bin grid histogram")
    counts = hist.counts
    return CoarseView(
        negative=int(counts[:4].sum()),
        neutral=int(counts[4]),
        positive=int(counts[5:].sum()),
    )


def component_histograms(
    records: Sequence[SentimentRecord], n_bins: int = 10
) -> Dict[str, OpinionHistogram]:
    """Per-component (neg, neu, pos) histograms on [0, 1]."""

    return {
        name: histogram([getattr(r, name) for r in records], 0.0, 1.0, n_bins)
        for name in ("neg", "neu", "pos")
    }


def write_grid_histogram_csv(hist: OpinionHistogram, path: str | Path) -> None:
    if hist.n_bins != INTEGRATED_BINS:
        raise InputDomainError(f"grid CSV needs the {INTEGRATED_BINS}-bin grid histogram")
    frame = pd.DataFrame(
        {"grid_score": GRID, "integrated_score": GRID + 1.0, "count": hist.counts}
    )
    frame.to_csv(path, index=False, lineterminator="\n")


def read_grid_histogram_csv(path: str | Path) -> OpinionHistogram:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise FormatError(f"Could not read grid histogram {path}: {exc}") from exc
    if list(frame.columns) != GRID_HEADER or len(frame) != INTEGRATED_BINS:
        raise FormatError(f"{path}: expected header {','.join(GRID_HEADER)} and {INTEGRATED_BINS} rows")
    grid = pd.to_numeric(frame["grid_score"], errors="coerce").to_numpy(dtype=np.float64)
    if not np.allclose(grid, GRID):
        raise FormatError(f"{path}: grid_score column must list the 0.25 grid from -1 to 1")
    return OpinionHistogram(
        lo=INTEGRATED_LO,
        hi=INTEGRATED_HI,
        n_bins=INTEGRATED_BINS,
        counts=counts_from_column(frame["count"], path),
    )
