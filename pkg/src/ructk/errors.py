"""Exception types raised by the toolkit.

Everything derives from :class:`RucError` so callers (and the CLI) can
separate data problems (exit code 1) from usage problems (argparse, exit 2).
"""


class RucError(Exception):
    """Base class for all toolkit errors."""


class EmptyManifest(RucError):
    """Manifest file contained zero records."""


class MalformedRecord(RucError):
    """A line-delimited record could not be parsed or violated an invariant."""

    def __init__(self, path, line_no, reason):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason


class MissingFeatureFile(RucError):
    """Feature file referenced by a manifest entry does not exist."""

    def __init__(self, utt_id, path):
        super().__init__(f"feature file for utterance '{utt_id}' not found: {path}")
        self.utt_id = utt_id
        self.path = str(path)


class DimMismatch(RucError):
    """Feature dimension differs from the corpus-wide feature_dim."""

    def __init__(self, utt_id, expected, found):
        super().__init__(
            f"utterance '{utt_id}': feature dim {found} != corpus dim {expected}"
        )
        self.utt_id = utt_id
        self.expected = expected
        self.found = found


class HeaderMismatch(RucError):
    """Feature file header disagrees with the expected shape."""


class TruncatedFile(RucError):
    """Feature file payload shorter (or longer) than its header promises."""


class EmptyHypothesis(RucError):
    """Hypothesis with zero tokens cannot be scored."""


class EmptyReference(RucError):
    """Reference transcript with zero tokens cannot be aligned."""

    def __init__(self, index=None):
        msg = "empty reference transcript"
        if index is not None:
            msg += f" at pair index {index}"
        super().__init__(msg)
        self.index = index


class ZeroBaseline(RucError):
    """Relative WER reduction is undefined for a zero baseline."""


class TooFewSettings(RucError):
    """Standard deviation over settings needs at least two entries."""


class InvalidSpans(RucError):
    """Span list is unsorted, overlapping, or contains empty spans."""


class Unachievable(RucError):
    """Segmentation cannot reach the requested mean duration."""

    def __init__(self, target, attainable):
        lo, hi = attainable
        super().__init__(
            f"target mean {target:.3f} s unachievable; attainable range is "
            f"({lo:.3f}, {hi:.3f}) s"
        )
        self.target = target
        self.attainable = attainable


class CallbackFailure(RucError):
    """Training-step callback raised; carries the failing step index."""

    def __init__(self, step_index, cause):
        super().__init__(f"step callback failed at step {step_index}: {cause}")
        self.step_index = step_index


class EmptyCurve(RucError):
    """Figure emission called with no data points."""


class IoFailure(RucError):
    """Output file could not be written."""
