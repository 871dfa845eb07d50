"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PipelineError):
    """Pipeline configuration is invalid or incomplete."""


class StageError(PipelineError):
    """A pipeline stage failed. Carries the stage name for exit reporting."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


# -- ingest ------------------------------------------------------------------

class MissingColumnError(PipelineError):
    """Schema names a column absent from the input header."""


class UnreadableSourceError(PipelineError):
    """A blocklist or input file is missing or cannot be decoded."""


class EmptyInputError(PipelineError):
    """An operation that requires records received none."""


# -- features ----------------------------------------------------------------

class NonAsciiDomainError(PipelineError):
    """Domain contains non-ASCII characters; punycode must be pre-converted."""


class EmptyGroupError(PipelineError):
    """A per-domain record group is empty."""


class SinglePointError(PipelineError):
    """An inter-event series needs at least two time points."""


class DomainNeverSeenError(PipelineError):
    """The domain does not appear in any of the given graphs."""


class EmptySeriesError(PipelineError):
    """A degree series is empty."""


class WidthMismatchError(PipelineError):
    """Assembled feature vector does not have the canonical width."""


# -- distribution fitting ----------------------------------------------------

class DegenerateSamplesError(PipelineError):
    """Samples carry no information for the requested fit."""


class NonConvergenceError(PipelineError):
    """Numeric optimisation exhausted its iteration budget."""


class BinMismatchError(PipelineError):
    """Histogram operands do not share bin edges."""


# -- detectors ---------------------------------------------------------------

class TooFewRowsError(PipelineError):
    """Matrix has fewer rows than the operation needs."""


class SingleClusterError(PipelineError):
    """Silhouette needs at least two nonempty clusters."""


class NoMaliciousRowsError(PipelineError):
    """Cluster selection needs at least one labelled malicious row."""


class DegenerateClusterError(PipelineError):
    """Cosine flagging needs both malicious and benign rows in the cluster."""


class SingleClassError(PipelineError):
    """Training data contains a single class."""


class LengthMismatchError(PipelineError):
    """Prediction and truth vectors differ in length."""


class ClassTooSmallError(PipelineError):
    """A class is too small to be split across train and test."""


# -- reporting ---------------------------------------------------------------

class MissingUpstreamError(PipelineError):
    """A report stage was asked to run before its inputs exist."""


class InvalidSpecError(PipelineError):
    """Fixture generator parameters are inconsistent."""
