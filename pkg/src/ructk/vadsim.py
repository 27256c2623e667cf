"""Test-segmentation simulator for VAD-style front-ends.

Takes speech/non-speech span lists per recording, drops non-speech, merges
speech spans separated by short gaps, and splits over-long merged regions
into near-equal pieces.  ``calibrate_max_segment`` bisects the split length
until the corpus-wide mean segment duration hits a target: that is the knob
used to produce the 15s/12s/10s/7s mean-length test conditions.

Span files are line-delimited: ``recording_id start_s end_s is_speech``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidSpans, MalformedRecord, Unachievable

DEFAULT_MERGE_GAP_S = 0.3
CALIBRATION_TOL_S = 0.1
_MAX_BISECT_ITERS = 50


@dataclass(frozen=True)
class SpeechSpan:
    start_s: float
    end_s: float
    is_speech: bool = True

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Segment:
    recording_id: str
    start_s: float
    end_s: float
    source_span_indices: tuple[int, ...]

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


def validate_spans(spans: list[SpeechSpan]) -> None:
    """Spans must be non-empty-length, sorted, and non-overlapping."""
    prev_end = -math.inf
    for i, span in enumerate(spans):
        if span.end_s <= span.start_s:
            raise InvalidSpans(f"span {i}: end {span.end_s} <= start {span.start_s}")
        if span.start_s < prev_end:
            raise InvalidSpans(f"span {i}: overlaps or unsorted at {span.start_s}")
        prev_end = span.end_s


def _merge_regions(
    spans: list[SpeechSpan], merge_gap_s: float
) -> list[tuple[float, float, tuple[int, ...]]]:
    """Merged speech regions as (start, end, source span indices)."""
    regions = []
    cur = None
    for i, span in enumerate(spans):
        if not span.is_speech:
            continue
        if cur is not None and span.start_s - cur[1] <= merge_gap_s:
            cur = (cur[0], span.end_s, cur[2] + (i,))
        else:
            if cur is not None:
                regions.append(cur)
            cur = (span.start_s, span.end_s, (i,))
    if cur is not None:
        regions.append(cur)
    return regions


def segment_recording(
    spans: list[SpeechSpan],
    max_segment_s: float,
    merge_gap_s: float = DEFAULT_MERGE_GAP_S,
    recording_id: str = "",
) -> list[Segment]:
    """Segment one recording's spans.

    Over-long merged regions are split into ceil(d / max_segment_s)
    near-equal pieces rather than greedy max-length cuts, so no pathological
    tail fragments appear.
    """
    if max_segment_s <= 0:
        raise ValueError("max_segment_s must be > 0")
    if merge_gap_s < 0:
        raise ValueError("merge_gap_s must be >= 0")
    validate_spans(spans)
    segments = []
    for start, end, indices in _merge_regions(spans, merge_gap_s):
        d = end - start
        pieces = max(1, math.ceil(d / max_segment_s - 1e-9))
        for k in range(pieces):
            lo = start + d * k / pieces
            hi = end if k == pieces - 1 else start + d * (k + 1) / pieces
            src = tuple(
                i for i in indices if spans[i].start_s < hi and spans[i].end_s > lo
            )
            segments.append(
                Segment(
                    recording_id=recording_id,
                    start_s=lo,
                    end_s=hi,
                    source_span_indices=src,
                )
            )
    return segments


def mean_segment_duration(
    recordings: list[list[SpeechSpan]],
    max_segment_s: float,
    merge_gap_s: float = DEFAULT_MERGE_GAP_S,
) -> float:
    """Mean segment duration over all recordings pooled.

    Computed from merged regions without materializing segments: each region
    of duration d yields ceil(d / max_segment_s) pieces summing to d exactly.
    """
    if max_segment_s <= 0:
        raise ValueError("max_segment_s must be > 0")
    total = 0.0
    count = 0
    for spans in recordings:
        validate_spans(spans)
        for start, end, _ in _merge_regions(spans, merge_gap_s):
            d = end - start
            total += d
            count += max(1, math.ceil(d / max_segment_s - 1e-9))
    if count == 0:
        raise InvalidSpans("no speech spans in any recording")
    return total / count


def calibrate_max_segment(
    recordings: list[list[SpeechSpan]],
    target_mean_s: float,
    merge_gap_s: float = DEFAULT_MERGE_GAP_S,
) -> float:
    """Bisect max_segment_s until the mean segment duration hits the target.

    Mean duration is monotone non-decreasing in max_segment_s (splitting only
    ever shortens), which is what makes bisection sound.  Raises Unachievable
    when the target lies outside (0, natural mean] or falls in a gap of the
    attainable step function wider than the 0.1 s tolerance.
    """
    if target_mean_s <= 0:
        raise ValueError("target_mean_s must be > 0")
    for spans in recordings:
        validate_spans(spans)
    longest = 0.0
    for spans in recordings:
        for start, end, _ in _merge_regions(spans, merge_gap_s):
            longest = max(longest, end - start)
    if longest == 0.0:
        raise InvalidSpans("no speech spans in any recording")
    hi = longest  # no region splits at this cap: the natural (maximal) mean
    natural_mean = mean_segment_duration(recordings, hi, merge_gap_s)
    if abs(natural_mean - target_mean_s) <= CALIBRATION_TOL_S:
        return hi
    if target_mean_s > natural_mean:
        raise Unachievable(target_mean_s, (0.0, natural_mean))
    lo = 1e-6
    for _ in range(_MAX_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        mean = mean_segment_duration(recordings, mid, merge_gap_s)
        if abs(mean - target_mean_s) <= CALIBRATION_TOL_S:
            return mid
        if mean < target_mean_s:
            lo = mid
        else:
            hi = mid
    raise Unachievable(target_mean_s, (0.0, natural_mean))


def read_span_file(path) -> dict[str, list[SpeechSpan]]:
    """Parse a span file, grouped by recording id in file order."""
    recordings: dict[str, list[SpeechSpan]] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 4:
                raise MalformedRecord(path, line_no, "expected 4 fields")
            rec_id, start_raw, end_raw, speech_raw = fields
            try:
                start, end = float(start_raw), float(end_raw)
            except ValueError as exc:
                raise MalformedRecord(path, line_no, "non-numeric span bounds") from exc
            flag = speech_raw.lower()
            if flag in ("1", "true", "speech"):
                is_speech = True
            elif flag in ("0", "false", "nonspeech"):
                is_speech = False
            else:
                raise MalformedRecord(path, line_no, f"bad is_speech value '{speech_raw}'")
            recordings.setdefault(rec_id, []).append(SpeechSpan(start, end, is_speech))
    return recordings
