import json

import numpy as np
import pytest

from ructk import featio
from ructk.corpus import Corpus, Utterance


def make_utterance(utt_id, duration_s, tokens, dim=4, fill=None):
    """In-memory utterance with frames matching the 10 ms hop."""
    frames = max(1, round(duration_s * 100))
    if fill is None:
        base = (hash(utt_id) % 97) / 10.0
        features = np.full((frames, dim), base, dtype=np.float32)
        features += np.arange(frames, dtype=np.float32)[:, None] * 0.01
    else:
        features = np.full((frames, dim), fill, dtype=np.float32)
    return Utterance(
        id=utt_id,
        features=features,
        transcript=tuple(tokens),
        duration_s=float(duration_s),
    )


def make_mini_corpus(specs, dim=4):
    """Corpus from (id, duration_s, tokens) triples."""
    utts = tuple(make_utterance(i, d, t, dim=dim) for i, d, t in specs)
    return Corpus(utterances=utts, feature_dim=dim)


def write_corpus_files(tmp_path, specs, dim=4):
    """Materialize (id, duration_s, tokens) triples as manifest + features."""
    feat_dir = tmp_path / "feats"
    feat_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for utt_id, duration_s, tokens in specs:
        utt = make_utterance(utt_id, duration_s, tokens, dim=dim)
        featio.write_features(feat_dir / f"{utt_id}.ruc", utt.features)
        lines.append(
            json.dumps(
                {
                    "id": utt_id,
                    "feature_path": f"feats/{utt_id}.ruc",
                    "frame_count": utt.frame_count,
                    "duration_s": utt.duration_s,
                    "transcript": " ".join(tokens),
                }
            )
        )
    manifest = tmp_path / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


@pytest.fixture
def three_utt_manifest(tmp_path):
    """The {2, 4, 6} s corpus used by the stats examples."""
    return write_corpus_files(
        tmp_path,
        [
            ("u1", 2.0, ["a", "b"]),
            ("u2", 4.0, ["c", "d", "e"]),
            ("u3", 6.0, ["f", "g", "h", "i"]),
        ],
    )
