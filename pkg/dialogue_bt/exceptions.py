"""Error hierarchy shared by every dialogue-bt component."""


class DialogueBTError(Exception):
    """Base class for all dialogue-bt errors."""

    category = "runtime"


class RejectedInputError(DialogueBTError, ValueError):
    """An operation received input outside its contract."""

    category = "rejected_input"


class ShapeError(RejectedInputError):
    """Tensor shapes do not conform to an op's contract."""

    category = "shape"


class CorpusFormatError(RejectedInputError):
    """A corpus, vocabulary or blocklist file contains a malformed line."""

    category = "corpus_format"

    def __init__(self, path: str, line_no: int, reason: str) -> None:
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class NumericError(DialogueBTError, ArithmeticError):
    """A NaN or infinite value reached an op boundary."""

    category = "numeric"


class ConfigError(DialogueBTError, ValueError):
    """Configuration values violate a documented constraint."""

    category = "config"


class UndefinedMetricError(DialogueBTError, ValueError):
    """A metric is undefined for the given input (e.g. zero n-grams)."""

    category = "undefined_metric"


class FrozenParameterError(DialogueBTError, RuntimeError):
    """A decoder that must stay frozen during a phase was modified."""

    category = "frozen_parameter"


class WorkspaceLockedError(DialogueBTError, RuntimeError):
    """Another command holds the lock on the output directory."""

    category = "locked"
