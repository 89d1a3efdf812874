"""Classified errors shared by the kernel modules.

Every failure of the checker or of a substitution operation is reported as a
``KernelError`` carrying exactly one ``ErrorKind``.  The ``path`` is a tuple of
human-readable steps from the judgement root down to the failing node.
"""

from __future__ import annotations

from enum import Enum


class ErrorKind(Enum):
    TYPE_MISMATCH = "TypeMismatch"
    UNBOUND_VARIABLE = "UnboundVariable"
    UNBOUND_CONSTANT = "UnboundConstant"
    NOT_PI = "NotPi"
    ARITY_MISMATCH = "ArityMismatch"
    LEVEL_VIOLATION = "LevelViolation"
    ILL_FORMED_CONTEXT = "IllFormedContext"
    NOT_ETA_LONG = "NotEtaLong"
    SUBST_FAILS = "SubstFails"
    UNKNOWN_APPROX = "UnknownApprox"
    DEPTH_EXCEEDED = "DepthExceeded"
    DUPLICATE_NAME = "DuplicateName"
    NOT_A_TYPE = "NotAType"


class KernelError(Exception):
    """A classified kernel failure.

    ``expected`` and ``actual`` carry printable payloads where applicable
    (e.g. the two types of a mismatch).
    """

    def __init__(self, kind, message, path=(), expected=None, actual=None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.path = tuple(path)
        self.expected = expected
        self.actual = actual

    def at(self, step):
        """The same error with ``step`` prepended to its path."""
        return KernelError(
            self.kind,
            self.message,
            (step,) + self.path,
            expected=self.expected,
            actual=self.actual,
        )

    def __str__(self):
        loc = "/".join(self.path)
        if loc:
            return f"{self.kind.value} at {loc}: {self.message}"
        return f"{self.kind.value}: {self.message}"


def fail(kind, message, path=(), expected=None, actual=None):
    raise KernelError(kind, message, path, expected=expected, actual=actual)
