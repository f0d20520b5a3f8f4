"""Exception taxonomy shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class UnknownIdError(EngineError):
    """A base design, improvement, criterion, or persona id was not declared."""


class ValidationError(EngineError):
    """A document failed validation. Carries the complete list of problems."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class InfeasibleError(EngineError):
    """No package can satisfy the stated constraints."""


class DomainError(EngineError):
    """Input is outside the mathematical domain of an operation."""


class RankDeficientError(EngineError):
    """A linear system is singular or underdetermined."""

    def __init__(self, rank, needed):
        self.rank = rank
        self.needed = needed
        super().__init__(f"system rank {rank} < {needed} unknowns")


class NoSimplexSolutionError(EngineError):
    """Observed utilities admit no nonnegative, sum-to-one weight vector."""


class DecodeError(EngineError):
    """A wire frame could not be decoded. ``offset`` is the byte position."""

    def __init__(self, message, offset=None):
        self.offset = offset
        super().__init__(message if offset is None else f"{message} (byte {offset})")


class ProtocolError(EngineError):
    """The negotiation protocol cannot proceed (e.g. every agent abstained)."""


class ReplayError(EngineError):
    """An audit trail is malformed or diverges from recomputation.

    ``seq`` is the sequence number of the first offending entry.
    """

    def __init__(self, message, seq=None):
        self.seq = seq
        super().__init__(message if seq is None else f"{message} (seq {seq})")
