"""Exception hierarchy shared across the toolkit.

DataError covers problems with user-supplied inputs (bad records, empty
corpora, degenerate training text); InvariantError marks conditions that
can only arise from a bug upstream in the pipeline itself.
"""


class CallSumError(Exception):
    pass


class DataError(CallSumError):
    pass


class ChannelError(DataError):
    """Channel ids of a call cannot be mapped onto customer/agent."""


class EmptyCorpusError(DataError):
    """Every document was filtered down to nothing."""


class EmptyDocumentError(DataError):
    """A document carries no usable terms."""


class DegenerateCorpusError(DataError):
    """A tagger training corpus without period labels."""


class InvariantError(CallSumError):
    pass


class AlignmentError(InvariantError):
    """Two renderings of the same text no longer share a token sequence."""
