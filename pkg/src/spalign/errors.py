"""Exception types raised by the pipeline's contract checks."""


class ZeroVectorError(ValueError):
    """A direction or embedding vector has (near-)zero norm."""


class NonFiniteError(ValueError):
    """An input that must be finite contains nan or inf."""


class SourceOutsideRoomError(ValueError):
    """A source or microphone position lies outside the room interior."""


class CoincidentSourceMicError(ValueError):
    """Source and microphone are closer than the minimum separation."""


class RoomTooSmallError(ValueError):
    """No valid source placement exists under the margin constraints."""


class EmptyClipError(ValueError):
    """An audio clip has zero samples."""


class SampleRateMismatchError(ValueError):
    """Two signals that must share a sample rate do not."""


class TooShortError(ValueError):
    """A signal is shorter than one analysis frame."""


class EmptyCaptionError(ValueError):
    """A caption string is empty."""


class LlmUnavailableError(RuntimeError):
    """The caption service is unreachable and the template fallback is off."""


class MalformedResponseError(RuntimeError):
    """The caption service answered with an unparseable payload."""


class DimMismatchError(ValueError):
    """Embedding operands disagree in dimensionality."""


class ZeroDirectionEmbeddingError(ZeroVectorError):
    """The substituted direction embedding has zero norm."""


class ZeroRowError(ValueError):
    """A similarity operand contains an all-zero row."""


class NonSquareError(ValueError):
    """A similarity matrix used for recall is not square."""


class LengthMismatchError(ValueError):
    """Paired batches differ in length."""


class BatchTooSmallError(ValueError):
    """A contrastive batch needs at least two items."""


class NonPositiveTemperatureError(ValueError):
    """Contrastive temperature must be strictly positive."""


class ShapeMismatchError(ValueError):
    """A model input does not match the expected feature shape."""


class DatasetTooSmallError(ValueError):
    """The training dataset has fewer than two items."""


class NonFiniteLossError(RuntimeError):
    """The training loss became nan or inf; the run is aborted."""


class ConfigError(ValueError):
    """A run configuration failed schema validation."""


class MissingInputError(FileNotFoundError):
    """A stage input file or directory does not exist."""
