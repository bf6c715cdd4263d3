"""Exception hierarchy shared by the library and the command line.

Every error carries the exit code the CLI returns when it escapes a command:
1 for usage errors, 2 for data/format errors and 3 for numeric failures.
"""
from typing import Optional, Sequence

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class TweetrankError(Exception):
    exit_code: int = EXIT_DATA


# Usage


class UsageError(TweetrankError, ValueError):
    exit_code = EXIT_USAGE


class ConfigError(UsageError):
    pass


# Data and formats


class DataFormatError(TweetrankError, ValueError):
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class MissingPathError(TweetrankError, FileNotFoundError):
    def __init__(self, path: str, what: str = "file"):
        super().__init__(f"The {what} does not exist: {path}")
        self.path = path


class AlignmentError(TweetrankError, ValueError):
    pass


class StatsError(TweetrankError, ValueError):
    pass


class TrainingError(TweetrankError, ValueError):
    pass


class VocabularyMismatchError(TweetrankError, ValueError):
    pass


class CheckpointError(TweetrankError, ValueError):
    pass


# Numerics


class NumericError(TweetrankError, ArithmeticError):
    exit_code = EXIT_NUMERIC


class DimensionError(NumericError):
    def __init__(self, op: str, axes: Sequence[str], *shapes: Sequence[int]):
        shapes_str = " vs ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"`{op}`: dimension mismatch on {', '.join(axes)} ({shapes_str})")
        self.op = op
        self.axes = tuple(axes)
        self.shapes = tuple(tuple(s) for s in shapes)


class DegenerateDocumentError(NumericError):
    pass


class GraphError(NumericError):
    pass


class OptimizerError(NumericError):
    def __init__(self, message: str, param_name: str):
        super().__init__(f"{message}: `{param_name}`")
        self.param_name = param_name
