"""Exception types shared across the pipeline."""


class KorpusmapError(Exception):
    """Base class for expected pipeline failures (CLI maps these to exit 1)."""


class CorpusError(KorpusmapError):
    """Corpus loading, fetching or sampling failed."""


class VectorizeError(KorpusmapError):
    """Vocabulary construction or vectorization failed."""


class ReductionError(KorpusmapError):
    """PCA or t-SNE preconditions violated, or the optimizer diverged."""


class BundleError(KorpusmapError):
    """Map bundle construction, serialization or rendering failed."""
