"""Utterance corpus: manifest ingestion and summary statistics.

A manifest is UTF-8 JSONL, one utterance per line:

    {"id": "u1", "feature_path": "feats/u1.ruc", "frame_count": 100,
     "duration_s": 1.0, "transcript": "a b c"}

``feature_path`` is resolved relative to the manifest's directory so corpora
are relocatable.  The corpus is immutable after loading and safe to share
across readers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import featio
from .errors import DimMismatch, EmptyManifest, MalformedRecord, MissingFeatureFile

FRAME_HOP_S = 0.010
# One-frame rounding slack on the duration <-> frame_count cross-check.
DURATION_SLACK_S = 0.011


@dataclass(frozen=True)
class Utterance:
    id: str
    features: np.ndarray          # (frames, feature_dim) float32
    transcript: tuple[str, ...]   # whitespace-split tokens
    duration_s: float

    @property
    def frame_count(self) -> int:
        return self.features.shape[0]

    @property
    def num_tokens(self) -> int:
        return len(self.transcript)


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    feature_path: str
    frame_count: int
    duration_s: float
    transcript: tuple[str, ...]


@dataclass(frozen=True)
class Corpus:
    utterances: tuple[Utterance, ...]
    feature_dim: int
    source_path: str = ""

    def __len__(self) -> int:
        return len(self.utterances)

    def __getitem__(self, i: int) -> Utterance:
        return self.utterances[i]

    @property
    def total_hours(self) -> float:
        return sum(u.duration_s for u in self.utterances) / 3600.0


@dataclass(frozen=True)
class CorpusSummary:
    utterance_count: int
    total_hours: float


def _parse_entry(path, line_no: int, raw: str) -> ManifestEntry:
    try:
        rec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(path, line_no, f"invalid JSON: {exc}") from exc
    if not isinstance(rec, dict):
        raise MalformedRecord(path, line_no, "record is not an object")
    for key in ("id", "feature_path", "frame_count", "duration_s", "transcript"):
        if key not in rec:
            raise MalformedRecord(path, line_no, f"missing field '{key}'")
    utt_id = rec["id"]
    if not isinstance(utt_id, str) or not utt_id:
        raise MalformedRecord(path, line_no, "'id' must be a non-empty string")
    frame_count = rec["frame_count"]
    if not isinstance(frame_count, int) or frame_count <= 0:
        raise MalformedRecord(path, line_no, "'frame_count' must be a positive integer")
    duration = rec["duration_s"]
    if not isinstance(duration, (int, float)) or duration <= 0:
        raise MalformedRecord(path, line_no, "'duration_s' must be positive")
    tokens = tuple(str(rec["transcript"]).split())
    if not tokens:
        raise MalformedRecord(path, line_no, "transcript has no tokens")
    if abs(duration - frame_count * FRAME_HOP_S) > DURATION_SLACK_S:
        raise MalformedRecord(
            path,
            line_no,
            f"duration {duration} s inconsistent with {frame_count} frames "
            f"at {FRAME_HOP_S * 1000:.0f} ms hop",
        )
    return ManifestEntry(
        id=utt_id,
        feature_path=str(rec["feature_path"]),
        frame_count=frame_count,
        duration_s=float(duration),
        transcript=tokens,
    )


def read_manifest(path) -> list[ManifestEntry]:
    """Parse a manifest without touching feature files."""
    path = Path(path)
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            entry = _parse_entry(path, line_no, line)
            if entry.id in seen:
                raise MalformedRecord(path, line_no, f"duplicate id '{entry.id}'")
            seen.add(entry.id)
            entries.append(entry)
    if not entries:
        raise EmptyManifest(f"{path}: no records")
    return entries


def load_manifest(path) -> Corpus:
    """Load a manifest and its feature files into an immutable corpus."""
    path = Path(path)
    entries = read_manifest(path)
    base = path.parent
    utterances = []
    feature_dim = None
    for entry in entries:
        feat_path = base / entry.feature_path
        if not feat_path.exists():
            raise MissingFeatureFile(entry.id, feat_path)
        features = featio.read_features(feat_path, frame_count=entry.frame_count)
        if feature_dim is None:
            feature_dim = features.shape[1]
        elif features.shape[1] != feature_dim:
            raise DimMismatch(entry.id, feature_dim, features.shape[1])
        utterances.append(
            Utterance(
                id=entry.id,
                features=features,
                transcript=entry.transcript,
                duration_s=entry.duration_s,
            )
        )
    return Corpus(
        utterances=tuple(utterances),
        feature_dim=int(feature_dim),
        source_path=str(path),
    )


def corpus_summary(corpus: Corpus) -> CorpusSummary:
    return CorpusSummary(
        utterance_count=len(corpus),
        total_hours=corpus.total_hours,
    )


def write_manifest(path, entries: list[ManifestEntry]) -> None:
    """Write manifest entries as JSONL (inverse of read_manifest)."""
    with open(path, "w", encoding="utf-8") as f:
        for e in entries:
            f.write(
                json.dumps(
                    {
                        "id": e.id,
                        "feature_path": e.feature_path,
                        "frame_count": e.frame_count,
                        "duration_s": e.duration_s,
                        "transcript": " ".join(e.transcript),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
