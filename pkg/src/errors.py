# src/errors.py
"""
Exception hierarchy shared by every module
"""


class GraphMergeError(Exception):
    """Base class for all errors raised by this package"""


class ConfigError(GraphMergeError):
    """Invalid configuration or command-line usage"""


class DataError(GraphMergeError, ValueError):
    """Input data does not satisfy the documented formats"""


class ConlluFormatError(DataError):
    """Malformed CoNLL-U line"""

    def __init__(self, message: str, line_number: int | None = None, source: str | None = None):
        self.line_number = line_number
        self.source = source
        location = source or "<conllu>"
        if line_number is not None:
            location = f"{location}:{line_number}"
        super().__init__(f"{location}: {message}")


class TreeStructureError(DataError):
    """Head assignment is not a rooted tree"""

    def __init__(self, message: str, sentence_index: int | None = None, parser_id: str | None = None):
        self.sentence_index = sentence_index
        self.parser_id = parser_id
        prefix = f"[{parser_id}] " if parser_id else ""
        if sentence_index is not None:
            prefix += f"sentence {sentence_index}: "
        super().__init__(prefix + message)


class DatasetError(DataError):
    """Invalid dataset line"""

    def __init__(self, message: str, line_number: int | None = None, source: str | None = None):
        self.line_number = line_number
        location = source or "<dataset>"
        if line_number is not None:
            location = f"{location}:{line_number}"
        super().__init__(f"{location}: {message}")


class AlignmentError(DataError):
    """Parses do not share the example's tokenization"""

    def __init__(self, message: str, parser_id: str, position: int | None = None):
        self.parser_id = parser_id
        self.position = position
        self.detail = message
        super().__init__(f"parser '{parser_id}': {message}")


class GraphMismatchError(DataError):
    """Graphs or parses over different node counts"""


class EmbeddingLookupError(DataError):
    """Token without a vector in file embedding mode"""


class CheckpointError(DataError):
    """Unreadable or incompatible checkpoint file"""


class ShapeError(GraphMergeError, ValueError):
    """Operand shapes are incompatible"""


class NonFiniteError(GraphMergeError, FloatingPointError):
    """NaN or Inf produced by a tensor operation"""


class TrainingDivergedError(GraphMergeError, RuntimeError):
    """Loss became non-finite during training"""
