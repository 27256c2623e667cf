"""Synthetic corpus generators.

The real short-video corpora are proprietary, so tests and demos run on
generated stand-ins: utterance durations come from a caller-chosen sampler,
frame counts follow the 10 ms hop, transcripts are drawn from a small token
vocabulary, and features are Gaussian noise.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import numpy as np

from . import featio
from .corpus import Corpus, ManifestEntry, Utterance, write_manifest
from .rng import Stream, synth_stream

DurationSampler = Callable[[Stream], float]


def uniform_durations(lo: float, hi: float) -> DurationSampler:
    return lambda rng: rng.uniform(lo, hi)


def normal_durations(mean: float, sd: float, floor: float = 0.05) -> DurationSampler:
    return lambda rng: max(floor, rng.normal(mean, sd))


def make_corpus(
    count: int,
    seed: int = 0,
    feature_dim: int = 8,
    duration_sampler: DurationSampler | None = None,
    min_tokens: int = 1,
    max_tokens: int = 30,
    vocab_size: int = 100,
    id_prefix: str = "utt",
    noise_features: bool = True,
) -> Corpus:
    """Build an in-memory corpus of `count` random utterances.

    noise_features=False leaves feature buffers unfilled (np.empty) for
    throughput tests that never look at feature values.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = synth_stream(seed)
    if duration_sampler is None:
        duration_sampler = uniform_durations(0.5, 8.0)
    feat_gen = np.random.Generator(
        np.random.Philox(key=np.array([seed, 0xFEA7], dtype=np.uint64))
    )
    utterances = []
    for i in range(count):
        duration = duration_sampler(rng)
        frames = max(1, round(duration * 100))
        n_tokens = rng.randint(min_tokens, max_tokens)
        transcript = tuple(
            f"w{rng.randbelow(vocab_size):03d}" for _ in range(n_tokens)
        )
        if noise_features:
            features = feat_gen.standard_normal(
                (frames, feature_dim), dtype=np.float32
            )
        else:
            features = np.empty((frames, feature_dim), dtype=np.float32)
        utterances.append(
            Utterance(
                id=f"{id_prefix}{i:05d}",
                features=features,
                transcript=transcript,
                duration_s=duration,
            )
        )
    return Corpus(utterances=tuple(utterances), feature_dim=feature_dim)


def materialize_corpus(corpus: Corpus, directory) -> Path:
    """Write a corpus as manifest + feature files; returns the manifest path."""
    directory = Path(directory)
    feat_dir = directory / "feats"
    feat_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for u in corpus.utterances:
        rel = f"feats/{u.id}.ruc"
        featio.write_features(directory / rel, u.features)
        entries.append(
            ManifestEntry(
                id=u.id,
                feature_path=rel,
                frame_count=u.frame_count,
                duration_s=u.duration_s,
                transcript=u.transcript,
            )
        )
    manifest_path = directory / "manifest.jsonl"
    write_manifest(manifest_path, entries)
    return manifest_path
