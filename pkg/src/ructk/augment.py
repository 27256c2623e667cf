"""On-the-fly random utterance concatenation.

Batch construction, per training step:

1. draw a fresh buffer of ``buffer_size`` distinct corpus indices
   (uniform, without replacement);
2. for each of the ``batch_size_B`` items, draw ``n`` uniform on
   ``{1..max_concat_N}``, then sample utterances uniformly *with*
   replacement from the buffer and append them greedily: if appending the
   next sampled utterance would push the transcript over ``max_tokens`` or
   the duration over ``max_duration_s``, stop early and keep what is
   accumulated.  The first sampled utterance is always admitted, so every
   raw corpus utterance stays legal on its own.

Features are appended along the frame axis with no gap frames; transcripts
are appended with no separator token.

All randomness for step ``s`` comes from the stream ``(seed, DOMAIN_BATCH,
s)`` (see :mod:`ructk.rng`), drawn in exactly the order above.  A batch is
therefore a pure function of (corpus, config, step): steps can be built on
any number of workers and reassembled in step order without changing a byte.
"""

from __future__ import annotations

import json
import math
import struct
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import islice
from typing import Callable, Iterable, Iterator

import numpy as np

from .corpus import Corpus, Utterance
from .errors import CallbackFailure, DimMismatch
from .rng import Stream, batch_stream

DEFAULT_MAX_TOKENS = 300
DEFAULT_MAX_DURATION_S = 25.0

STAGE1 = "stage1"
STAGE2 = "stage2"


@dataclass(frozen=True)
class RucConfig:
    """Knobs of the concatenation sampler.

    ``max_tokens`` / ``max_duration_s`` accept None to disable a cap.
    """

    total_steps_S: int = 1
    batch_size_B: int = 1
    max_concat_N: int = 1
    buffer_size: int | None = None   # None -> 10 * batch_size_B
    max_tokens: int | None = DEFAULT_MAX_TOKENS
    max_duration_s: float | None = DEFAULT_MAX_DURATION_S
    seed: int = 0

    def __post_init__(self):
        if self.total_steps_S < 0:
            raise ValueError("total_steps_S must be >= 0")
        if self.batch_size_B < 1:
            raise ValueError("batch_size_B must be >= 1")
        if self.max_concat_N < 1:
            raise ValueError("max_concat_N must be >= 1")
        if self.buffer_size is None:
            object.__setattr__(self, "buffer_size", 10 * self.batch_size_B)
        if self.buffer_size < 1:
            raise ValueError("buffer_size must be >= 1")
        if self.max_tokens is not None and self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1 (or None)")
        if self.max_duration_s is not None and self.max_duration_s <= 0:
            raise ValueError("max_duration_s must be > 0 (or None)")


@dataclass(frozen=True)
class ConcatItem:
    source_ids: tuple[str, ...]
    features: np.ndarray
    transcript: tuple[str, ...]
    duration_s: float

    @property
    def num_tokens(self) -> int:
        return len(self.transcript)

    @property
    def frame_count(self) -> int:
        return self.features.shape[0]

    def transcript_text(self) -> str:
        return " ".join(self.transcript)


@dataclass(frozen=True)
class Batch:
    items: tuple[ConcatItem, ...]
    step_index: int


@dataclass(frozen=True)
class TrainingSchedule:
    """Two-stage driver: plain training first, concatenation fine-tune after."""

    stage1_steps: int = 200_000
    stage2_steps: int = 50_000
    stage1_lr_policy: str = "decay"
    stage2_lr_policy: str = "constant"

    def __post_init__(self):
        if self.stage1_steps < 0 or self.stage2_steps < 0:
            raise ValueError("stage step counts must be >= 0")


@dataclass(frozen=True)
class RunReport:
    stage1_steps_run: int
    stage2_steps_run: int


def sample_buffer(corpus: Corpus, size: int, rng: Stream) -> list[int]:
    """min(size, |corpus|) distinct corpus indices, uniform without replacement."""
    if size < 1:
        raise ValueError("buffer size must be >= 1")
    return rng.sample_indices(len(corpus), size)


def draw_concat_count(rng: Stream, max_concat_n: int) -> int:
    """Uniform integer on {1..max_concat_n}."""
    if max_concat_n < 1:
        raise ValueError("max_concat_n must be >= 1")
    return 1 + rng.randbelow(max_concat_n)


def concat_utterances(parts: list[Utterance]) -> ConcatItem:
    """Concatenate features along the frame axis and transcripts token-wise."""
    if not parts:
        raise ValueError("need at least one part")
    dim = parts[0].features.shape[1]
    for p in parts[1:]:
        if p.features.shape[1] != dim:
            raise DimMismatch(p.id, dim, p.features.shape[1])
    if len(parts) == 1:
        features = parts[0].features
    else:
        features = np.concatenate([p.features for p in parts], axis=0)
    transcript = tuple(tok for p in parts for tok in p.transcript)
    duration = 0.0
    for p in parts:
        duration += p.duration_s
    return ConcatItem(
        source_ids=tuple(p.id for p in parts),
        features=features,
        transcript=transcript,
        duration_s=duration,
    )


def build_batch(corpus: Corpus, cfg: RucConfig, rng: Stream, step: int) -> Batch:
    """One batch of ``batch_size_B`` concatenated items from a fresh buffer."""
    buffer = sample_buffer(corpus, cfg.buffer_size, rng)
    m = len(buffer)
    max_tokens = cfg.max_tokens if cfg.max_tokens is not None else math.inf
    max_duration = cfg.max_duration_s if cfg.max_duration_s is not None else math.inf
    items = []
    for _ in range(cfg.batch_size_B):
        n = draw_concat_count(rng, cfg.max_concat_N)
        parts: list[Utterance] = []
        tokens = 0
        duration = 0.0
        for i in range(n):
            utt = corpus[buffer[rng.randbelow(m)]]
            if i and (
                tokens + utt.num_tokens > max_tokens
                or duration + utt.duration_s > max_duration
            ):
                break
            parts.append(utt)
            tokens += utt.num_tokens
            duration += utt.duration_s
        items.append(concat_utterances(parts))
    return Batch(items=tuple(items), step_index=step)


def _build_step(corpus: Corpus, cfg: RucConfig, step: int) -> Batch:
    return build_batch(corpus, cfg, batch_stream(cfg.seed, step), step)


def iter_batches(
    corpus: Corpus,
    cfg: RucConfig,
    num_steps: int,
    start_step: int = 0,
    threads: int = 1,
) -> Iterator[Batch]:
    """Yield batches for steps [start_step, start_step + num_steps) in order.

    With threads > 1, steps are built concurrently on their own derived
    streams and reassembled in step order; output is byte-identical to the
    single-threaded stream.
    """
    steps = iter(range(start_step, start_step + num_steps))
    if threads <= 1:
        for s in steps:
            yield _build_step(corpus, cfg, s)
        return
    window = threads * 4
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending = deque(
            pool.submit(_build_step, corpus, cfg, s) for s in islice(steps, window)
        )
        while pending:
            batch = pending.popleft().result()
            nxt = next(steps, None)
            if nxt is not None:
                pending.append(pool.submit(_build_step, corpus, cfg, nxt))
            yield batch


def run_schedule(
    corpus: Corpus,
    cfg: RucConfig,
    schedule: TrainingSchedule,
    step_fn: Callable[[Batch, str], None],
    threads: int = 1,
) -> RunReport:
    """Drive a caller-supplied training step through both stages.

    Stage 1 is the same sampler with max_concat_N forced to 1 (no
    concatenation); stage 2 uses the configured N.  Step indices run
    continuously across stages, so every step keeps its own RNG stream.
    """
    stage1_cfg = replace(cfg, max_concat_N=1)
    counts = {STAGE1: 0, STAGE2: 0}
    stages = (
        (STAGE1, stage1_cfg, schedule.stage1_steps, 0),
        (STAGE2, cfg, schedule.stage2_steps, schedule.stage1_steps),
    )
    for tag, stage_cfg, num_steps, start in stages:
        for batch in iter_batches(corpus, stage_cfg, num_steps, start, threads):
            try:
                step_fn(batch, tag)
            except Exception as exc:
                raise CallbackFailure(batch.step_index, exc) from exc
            counts[tag] += 1
    return RunReport(
        stage1_steps_run=counts[STAGE1],
        stage2_steps_run=counts[STAGE2],
    )


# --- serialization -------------------------------------------------------
#
# Augmented manifest: JSONL, one ConcatItem per line, with the source
# utterance ids (features are recoverable by concatenating the sources).
#
# Batch file (little-endian):
#   magic b"RUCB", u16 version=1, u16 len + utf8 creator string
#   (toolkit version + RNG algorithm), then per batch:
#     u64 step_index, u32 item_count, items...
#   item: u32 source_count, source_count * (u16 len + utf8 id),
#         u32 token_count, token_count * (u16 len + utf8 token),
#         f64 duration_s, u32 frame_count, u32 feature_dim,
#         frame_count * feature_dim float32 payload.

BATCH_MAGIC = b"RUCB"
BATCH_VERSION = 1


def item_record(item: ConcatItem, step: int, slot: int) -> dict:
    return {
        "id": f"ruc-{step:06d}-{slot:03d}",
        "source_ids": list(item.source_ids),
        "frame_count": item.frame_count,
        "duration_s": item.duration_s,
        "transcript": item.transcript_text(),
    }


def write_augmented_manifest(fh, batches: Iterable[Batch]) -> int:
    """Write one JSONL record per item; returns the record count."""
    written = 0
    for batch in batches:
        for slot, item in enumerate(batch.items):
            rec = item_record(item, batch.step_index, slot)
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            written += 1
    return written


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def serialize_batch(batch: Batch) -> bytes:
    out = [struct.pack("<QI", batch.step_index, len(batch.items))]
    for item in batch.items:
        out.append(struct.pack("<I", len(item.source_ids)))
        out.extend(_pack_str(s) for s in item.source_ids)
        out.append(struct.pack("<I", len(item.transcript)))
        out.extend(_pack_str(t) for t in item.transcript)
        frames, dim = item.features.shape
        out.append(struct.pack("<dII", item.duration_s, frames, dim))
        out.append(np.ascontiguousarray(item.features, dtype="<f4").tobytes())
    return b"".join(out)


def write_batch_header(fh, creator: str = "") -> None:
    fh.write(BATCH_MAGIC + struct.pack("<H", BATCH_VERSION))
    fh.write(_pack_str(creator))


def write_batch_file(fh, batches: Iterable[Batch], creator: str = "") -> int:
    """Write the binary batch stream; returns the batch count."""
    write_batch_header(fh, creator)
    count = 0
    for batch in batches:
        fh.write(serialize_batch(batch))
        count += 1
    return count
