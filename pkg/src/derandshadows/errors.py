"""Exception hierarchy; each class maps to one CLI exit code."""


class DSSError(Exception):
    exit_code = 1


class DomainError(DSSError, ValueError):
    """Invalid argument value (out of range, empty input, wrong kind)."""

    exit_code = 2


class ParseError(DSSError, ValueError):
    exit_code = 3


class DimensionError(DSSError, ValueError):
    """Qubit counts or record lengths that do not line up."""

    exit_code = 4


class StateError(DSSError, RuntimeError):
    """Operation requires a different object state (e.g. a deterministic spec)."""

    exit_code = 4


class ResourceError(DSSError, MemoryError):
    exit_code = 4


class UnsupportedError(DSSError, ValueError):
    exit_code = 2


class InvariantError(DSSError, AssertionError):
    """A guarantee that should hold by construction was violated."""

    exit_code = 5
