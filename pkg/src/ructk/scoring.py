"""Hypothesis scoring and length-normalized n-best rescoring.

The raw score of a hypothesis is the sum of its per-token log-probabilities.
Length normalization divides by ((5 + |y|) / 6) ** alpha, which equals 1 at
alpha == 0 and at |y| == 1 and grows with length otherwise, so positive
alpha awards longer hypotheses.  ``sweep_alpha`` picks the alpha minimizing
corpus WER of the top-ranked hypotheses, ties going to the smaller alpha.

N-best files are line-delimited: ``utterance_id rank token:logprob ...``
(logprob split on the last colon, so tokens may contain colons but not
whitespace).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyHypothesis, MalformedRecord
from .wer import corpus_wer

ALPHA_GRID_DEFAULT = tuple(round(0.1 * i, 1) for i in range(9))  # 0.0 .. 0.8


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[str, ...]
    token_logprobs: tuple[float, ...]
    utterance_id: str = ""

    def __post_init__(self):
        if len(self.tokens) != len(self.token_logprobs):
            raise ValueError(
                f"{len(self.tokens)} tokens but {len(self.token_logprobs)} logprobs"
            )
        for lp in self.token_logprobs:
            if lp > 0:
                raise ValueError(f"log-probability {lp} > 0")


@dataclass(frozen=True)
class NormalizedScore:
    raw_s: float
    alpha: float
    norm_s: float
    length: int


def raw_score(hyp: Hypothesis) -> float:
    """Sum of per-token log-probabilities."""
    if not hyp.tokens:
        raise EmptyHypothesis(f"hypothesis '{hyp.utterance_id}' has no tokens")
    return sum(hyp.token_logprobs)


def length_normalized_score(s: float, length: int, alpha: float) -> float:
    """s divided by ((5 + length) / 6) ** alpha.

    alpha == 0 reduces to the identity bit-exactly (x ** 0.0 == 1.0).
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return s / (((5.0 + length) / 6.0) ** alpha)


def score_hypothesis(hyp: Hypothesis, alpha: float) -> NormalizedScore:
    s = raw_score(hyp)
    return NormalizedScore(
        raw_s=s,
        alpha=alpha,
        norm_s=length_normalized_score(s, len(hyp.tokens), alpha),
        length=len(hyp.tokens),
    )


def rescore_nbest(nbest: Sequence[Hypothesis], alpha: float) -> list[Hypothesis]:
    """Stable sort by normalized score, best first; ties keep input order."""
    if not nbest:
        raise ValueError("empty n-best list")
    scored = [(score_hypothesis(h, alpha).norm_s, h) for h in nbest]
    scored.sort(key=lambda pair: -pair[0])
    return [h for _, h in scored]


def sweep_alpha(
    nbest_sets: Sequence[tuple[Sequence[str], Sequence[Hypothesis]]],
    grid: Iterable[float] = ALPHA_GRID_DEFAULT,
) -> tuple[float, list[tuple[float, float]]]:
    """Corpus WER of top-1 picks per alpha; returns (best alpha, all results).

    Results preserve grid order; the best alpha is the smallest one among
    those reaching the minimum WER.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty alpha grid")
    results = []
    for alpha in grid:
        pairs = []
        for ref, nbest in nbest_sets:
            top = rescore_nbest(nbest, alpha)[0]
            pairs.append((tuple(ref), top.tokens))
        results.append((alpha, corpus_wer(pairs).wer_percent))
    best_alpha = min(results, key=lambda aw: (aw[1], aw[0]))[0]
    return best_alpha, results


def read_nbest_file(path) -> dict[str, list[Hypothesis]]:
    """Parse an n-best file into per-utterance lists ordered by rank."""
    by_utt: dict[str, list[tuple[int, Hypothesis]]] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split()
            if len(fields) < 3:
                raise MalformedRecord(
                    path, line_no, "expected: utterance_id rank token:logprob ..."
                )
            utt_id, rank_raw = fields[0], fields[1]
            try:
                rank = int(rank_raw)
            except ValueError as exc:
                raise MalformedRecord(path, line_no, f"bad rank '{rank_raw}'") from exc
            tokens = []
            logprobs = []
            for field in fields[2:]:
                tok, sep, lp_raw = field.rpartition(":")
                if not sep or not tok:
                    raise MalformedRecord(
                        path, line_no, f"field '{field}' is not token:logprob"
                    )
                try:
                    lp = float(lp_raw)
                except ValueError as exc:
                    raise MalformedRecord(
                        path, line_no, f"bad logprob in '{field}'"
                    ) from exc
                tokens.append(tok)
                logprobs.append(lp)
            try:
                hyp = Hypothesis(tuple(tokens), tuple(logprobs), utt_id)
            except ValueError as exc:
                raise MalformedRecord(path, line_no, str(exc)) from exc
            by_utt.setdefault(utt_id, []).append((rank, hyp))
    return {
        utt: [h for _, h in sorted(entries, key=lambda rh: rh[0])]
        for utt, entries in by_utt.items()
    }
