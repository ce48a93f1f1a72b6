"""
Exception hierarchy shared by every softReasoner app.

Each error class carries the process exit code the management commands
report when the error escapes to the command line.
"""

from typing import Optional, Tuple


class NeptError(Exception):
    """Root of all engine errors."""
    exit_code = 1

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def locate(self, line: int, column: int):
        """Attach a source position unless one is already set."""
        if self.line is None:
            self.line = line
            self.column = column
        return self

    def __str__(self):
        if self.line is not None:
            return f'{self.line}:{self.column}: {self.message}'
        return self.message


# Program language

class ProgramSyntaxError(NeptError):
    """Lexical or syntactic error in a reasoning program."""
    exit_code = 2

    def __init__(self, message: str, line: int, column: int,
                 span: Optional[Tuple[int, int]] = None):
        super().__init__(message, line, column)
        self.span = span


# Soft logic / tensor core

class SoftLogicError(NeptError):
    exit_code = 3


class ShapeMismatchError(SoftLogicError):
    pass


class SoftRangeError(SoftLogicError):
    pass


class TapeError(SoftLogicError):
    pass


# Execution

class ExecutionError(NeptError):
    """Runtime failure while interpreting a program."""
    exit_code = 3


class UnboundNameError(ExecutionError):
    pass


class FlavorError(ExecutionError):
    """Operator or builtin applied to values it is not defined for."""
    pass


class BudgetExceededError(ExecutionError):
    pass


class MissingReturnError(ExecutionError):
    pass


# Grounding

class GroundingError(NeptError):
    exit_code = 4


class UnknownPredicateError(GroundingError):
    pass


class ArityMismatchError(GroundingError):
    pass


class GrounderTimeoutError(GroundingError):
    pass


class MalformedResponseError(GroundingError):
    pass


# Configuration and the remaining layers

class ConfigurationError(NeptError):
    exit_code = 5


class VerificationError(NeptError):
    exit_code = 5


class GenerationError(NeptError):
    """A question template could not be satisfied on a scene."""
    exit_code = 1
