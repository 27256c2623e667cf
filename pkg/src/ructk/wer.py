"""Word error rate: edit-distance alignment, pooled corpus WER, relative
reduction (WERR), and the spread-across-VAD-settings report.

Tokens are whatever whitespace-separated units the transcripts carry; no
text normalization happens here.  Corpus WER is pooled (total errors over
total reference tokens), not a mean of per-utterance rates.  Standard
deviations use the sample (n-1) convention.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyReference, MalformedRecord, TooFewSettings, ZeroBaseline

TokenSeq = Sequence[str]


@dataclass(frozen=True)
class AlignCounts:
    substitutions: int
    deletions: int
    insertions: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@dataclass(frozen=True)
class WerReport:
    substitutions: int
    deletions: int
    insertions: int
    ref_tokens: int
    wer_percent: float


@dataclass(frozen=True)
class WerrCell:
    baseline_wer: float
    system_wer: float
    werr_percent: float


@dataclass(frozen=True)
class VadRobustnessRow:
    wers: tuple[tuple[str, float], ...]
    sd: float


def align(ref: TokenSeq, hyp: TokenSeq) -> AlignCounts:
    """Minimal-cost alignment counts under unit sub/del/ins costs.

    The backtrace prefers substitution over deletion over insertion on cost
    ties, so the (S, D, I) decomposition is deterministic even though the
    total distance alone would not pin it down.
    """
    if len(ref) == 0:
        raise EmptyReference()
    r, h = len(ref), len(hyp)
    dist = [[0] * (h + 1) for _ in range(r + 1)]
    for i in range(1, r + 1):
        dist[i][0] = i
    for j in range(1, h + 1):
        dist[0][j] = j
    for i in range(1, r + 1):
        ref_tok = ref[i - 1]
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, h + 1):
            sub = prev[j - 1] + (ref_tok != hyp[j - 1])
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = min(sub, dele, ins)
    subs = dels = inss = 0
    i, j = r, h
    while i > 0 or j > 0:
        cost = dist[i][j]
        if i > 0 and j > 0 and cost == dist[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            if ref[i - 1] != hyp[j - 1]:
                subs += 1
            i -= 1
            j -= 1
        elif i > 0 and cost == dist[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            inss += 1
            j -= 1
    return AlignCounts(subs, dels, inss)


def corpus_wer(
    pairs: Sequence[tuple[TokenSeq, TokenSeq]], threads: int = 1
) -> WerReport:
    """Pooled WER: total (S + D + I) over total reference tokens.

    Per-pair alignments are independent; with threads > 1 they run
    concurrently and are pooled in pair order, so the report is identical
    for any thread count.
    """
    if not pairs:
        raise ValueError("no (ref, hyp) pairs")
    for index, (ref, _) in enumerate(pairs):
        if len(ref) == 0:
            raise EmptyReference(index)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_counts = list(pool.map(lambda p: align(p[0], p[1]), pairs))
    else:
        all_counts = [align(ref, hyp) for ref, hyp in pairs]
    subs = dels = inss = ref_tokens = 0
    for (ref, _), counts in zip(pairs, all_counts):
        subs += counts.substitutions
        dels += counts.deletions
        inss += counts.insertions
        ref_tokens += len(ref)
    return WerReport(
        substitutions=subs,
        deletions=dels,
        insertions=inss,
        ref_tokens=ref_tokens,
        wer_percent=100.0 * (subs + dels + inss) / ref_tokens,
    )


def werr(baseline_wer: float, system_wer: float) -> float:
    """Relative WER reduction in percent; negative when the system is worse."""
    if baseline_wer == 0:
        raise ZeroBaseline("WERR undefined for zero baseline WER")
    return 100.0 * (baseline_wer - system_wer) / baseline_wer


def werr_cell(baseline_wer: float, system_wer: float) -> WerrCell:
    return WerrCell(
        baseline_wer=baseline_wer,
        system_wer=system_wer,
        werr_percent=werr(baseline_wer, system_wer),
    )


def sample_sd(values: Sequence[float]) -> float:
    """Sample standard deviation (n-1 denominator); 0.0 for a single value."""
    n = len(values)
    if n < 2:
        return 0.0
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))


def vad_robustness(wers: Sequence[tuple[str, float]]) -> VadRobustnessRow:
    """WERs per VAD setting plus their sample standard deviation."""
    if len(wers) < 2:
        raise TooFewSettings("need at least 2 (setting, WER) entries")
    return VadRobustnessRow(
        wers=tuple(wers),
        sd=sample_sd([w for _, w in wers]),
    )


def read_hyp_file(path) -> dict[str, tuple[str, ...]]:
    """Hypothesis file: one line per utterance, ``utterance_id token ...``.

    A line with only an id is a legal empty hypothesis (pure deletions).
    """
    hyps: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split()
            utt_id = fields[0]
            if utt_id in hyps:
                raise MalformedRecord(path, line_no, f"duplicate id '{utt_id}'")
            hyps[utt_id] = tuple(fields[1:])
    return hyps
