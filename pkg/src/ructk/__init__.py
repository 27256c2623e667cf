"""Random utterance concatenation augmentation and ASR evaluation toolkit."""

__version__ = "0.1.0"

from .augment import (  # noqa: F401
    Batch,
    ConcatItem,
    RucConfig,
    TrainingSchedule,
    build_batch,
    concat_utterances,
    draw_concat_count,
    iter_batches,
    run_schedule,
    sample_buffer,
)
from .corpus import (  # noqa: F401
    Corpus,
    ManifestEntry,
    Utterance,
    corpus_summary,
    load_manifest,
)
from .scoring import (  # noqa: F401
    Hypothesis,
    length_normalized_score,
    raw_score,
    rescore_nbest,
    sweep_alpha,
)
from .vadsim import (  # noqa: F401
    Segment,
    SpeechSpan,
    calibrate_max_segment,
    segment_recording,
)
from .wer import align, corpus_wer, vad_robustness, werr  # noqa: F401
from .analysis import (  # noqa: F401
    expected_concat_ratio,
    length_stats,
    ratio_curve,
    wer_by_length_bucket,
)
