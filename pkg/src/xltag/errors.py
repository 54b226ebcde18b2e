"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
DivergenceError -> 3.
"""


class ConfigError(Exception):
    """Invalid configuration: bad flag values, unresolvable paths."""


class DataError(Exception):
    """Malformed or inconsistent input data."""


class CorpusFormatError(DataError):
    """A corpus file violates its line format."""


class CorpusAlignmentError(DataError):
    """Parallel corpus halves disagree (line counts)."""


class TagsetError(DataError):
    """A tag label is unknown or a tagset file is invalid."""


class DivergenceError(Exception):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, sentence_index: int):
        self.epoch = epoch
        self.sentence_index = sentence_index
        super().__init__(
            f"non-finite training loss at epoch {epoch}, sentence {sentence_index}"
        )
