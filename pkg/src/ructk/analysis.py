"""Length statistics, duration-ratio curves, and WER-vs-length bucketing.

The ratio axis: an item built from n uniformly-drawn concatenations of
utterances with mean duration m_train has expected duration
m_train * (n + 1) / 2 (uncapped), so the train-test duration ratio for a
setting n is

    R(n) = m_train * (n + 1) / 2 / m_test

which is the x-coordinate the reference result curves are plotted at.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .corpus import Corpus
from .errors import EmptyCurve, IoFailure
from .wer import TokenSeq, align, sample_sd


@dataclass(frozen=True)
class LengthStats:
    mean_duration_s: float
    sd_duration_s: float
    mean_tokens: float
    sd_tokens: float


@dataclass(frozen=True)
class RatioPoint:
    n: int
    ratio_r: float
    werr: float


@dataclass(frozen=True)
class BucketPoint:
    bucket: int      # inclusive upper token-count edge; plotted x position
    wer_percent: float
    pair_count: int
    ref_tokens: int  # lets bucket WERs recombine exactly to the corpus WER


@dataclass(frozen=True)
class LengthBucketCurve:
    bucket_width_tokens: int
    points: tuple[BucketPoint, ...]


def length_stats(corpus: Corpus) -> LengthStats:
    """Mean and sample SD of duration and token count; SD 0 for one utterance."""
    durations = [u.duration_s for u in corpus.utterances]
    tokens = [float(u.num_tokens) for u in corpus.utterances]
    return LengthStats(
        mean_duration_s=sum(durations) / len(durations),
        sd_duration_s=sample_sd(durations),
        mean_tokens=sum(tokens) / len(tokens),
        sd_tokens=sample_sd(tokens),
    )


def expected_concat_ratio(train_mean_s: float, test_mean_s: float, n: int) -> float:
    """R = train_mean * (n + 1) / 2 / test_mean."""
    if train_mean_s <= 0 or test_mean_s <= 0:
        raise ValueError("duration means must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    return train_mean_s * (n + 1) / 2.0 / test_mean_s


def ratio_curve(
    train_mean_s: float,
    test_mean_s: float,
    werr_by_n: Sequence[tuple[int, float]],
) -> list[RatioPoint]:
    """Pair each concatenation setting's WERR with its expected ratio."""
    ns = [n for n, _ in werr_by_n]
    if len(set(ns)) != len(ns):
        raise ValueError("duplicate n in werr_by_n")
    return [
        RatioPoint(n=n, ratio_r=expected_concat_ratio(train_mean_s, test_mean_s, n), werr=w)
        for n, w in sorted(werr_by_n)
    ]


def wer_by_length_bucket(
    pairs: Sequence[tuple[TokenSeq, TokenSeq]],
    bucket_width: int = 10,
) -> LengthBucketCurve:
    """Pooled WER per reference-length bucket [1..w], (w..2w], ...

    Each point is labeled by the bucket's inclusive upper edge, matching the
    x positions the reference curves are plotted at; empty buckets are
    omitted.
    """
    if bucket_width < 1:
        raise ValueError("bucket_width must be >= 1")
    errors: dict[int, int] = {}
    ref_tokens: dict[int, int] = {}
    counts: dict[int, int] = {}
    for ref, hyp in pairs:
        upper = math.ceil(len(ref) / bucket_width) * bucket_width
        counts[upper] = counts.get(upper, 0) + 1
        ref_tokens[upper] = ref_tokens.get(upper, 0) + len(ref)
        errors[upper] = errors.get(upper, 0) + align(ref, hyp).errors
    points = tuple(
        BucketPoint(
            bucket=upper,
            wer_percent=100.0 * errors[upper] / ref_tokens[upper],
            pair_count=counts[upper],
            ref_tokens=ref_tokens[upper],
        )
        for upper in sorted(counts)
    )
    return LengthBucketCurve(bucket_width_tokens=bucket_width, points=points)


# --- figure emission ------------------------------------------------------

def ratio_curve_tsv(curves: dict[str, list[RatioPoint]]) -> str:
    """Deterministic TSV, 2-decimal fixed point, header as a comment line."""
    if not curves or all(not pts for pts in curves.values()):
        raise EmptyCurve("no ratio points to emit")
    lines = ["# language\tn\tratio\twerr"]
    for lang, points in curves.items():
        if not points:
            raise EmptyCurve(f"no ratio points for '{lang}'")
        for p in points:
            lines.append(f"{lang}\t{p.n}\t{p.ratio_r:.2f}\t{p.werr:.2f}")
    return "\n".join(lines) + "\n"


def length_bucket_tsv(curve: LengthBucketCurve) -> str:
    if not curve.points:
        raise EmptyCurve("no length buckets to emit")
    lines = ["# bucket_upper_tokens\twer_percent\tpair_count"]
    for p in curve.points:
        lines.append(f"{p.bucket}\t{p.wer_percent:.2f}\t{p.pair_count}")
    return "\n".join(lines) + "\n"


def _svg_polyline(series: list[tuple[str, list[tuple[float, float]]]]) -> str:
    """Minimal deterministic SVG: one polyline per labeled series."""
    width, height, margin = 640, 420, 50
    xs = [x for _, pts in series for x, _ in pts]
    ys = [y for _, pts in series for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x):
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]
    for k, (label, pts) in enumerate(series):
        color = palette[k % len(palette)]
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        lx, ly = pts[-1]
        parts.append(
            f'<text x="{sx(lx) + 4:.1f}" y="{sy(ly):.1f}" font-size="11" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def ratio_curve_svg(curves: dict[str, list[RatioPoint]]) -> str:
    if not curves or all(not pts for pts in curves.values()):
        raise EmptyCurve("no ratio points to emit")
    series = [
        (lang, [(p.ratio_r, p.werr) for p in points])
        for lang, points in curves.items()
        if points
    ]
    return _svg_polyline(series)


def length_bucket_svg(curve: LengthBucketCurve) -> str:
    if not curve.points:
        raise EmptyCurve("no length buckets to emit")
    return _svg_polyline(
        [("wer", [(float(p.bucket), p.wer_percent) for p in curve.points])]
    )


def write_text(path, content: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# --- bundled reference results ---------------------------------------------

def load_reference_results() -> dict:
    """Published benchmark numbers shipped with the package."""
    data = importlib.resources.files("ructk").joinpath("data/reference_results.json")
    return json.loads(data.read_text(encoding="utf-8"))


def reference_ratio_curves(results: dict | None = None) -> dict[str, list[RatioPoint]]:
    """Ratio curves recomputed from the bundled length statistics and WERRs."""
    if results is None:
        results = load_reference_results()
    curves = {}
    for lang, entry in results["languages"].items():
        werr_by_n = [(int(n), w) for n, w in entry["werr_by_n"].items()]
        curves[lang] = ratio_curve(
            entry["train"]["mean_duration_s"],
            entry["test"]["mean_duration_s"],
            werr_by_n,
        )
    return curves
