"""Exception hierarchy shared by all modules."""


class PbaError(Exception):
    """Base class for every error raised by this package."""


class ArityMismatch(PbaError, ValueError):
    pass


class IndexOutOfRange(PbaError, IndexError):
    pass


class NotAMeasure(PbaError, ValueError):
    pass


class MissingValue(PbaError, KeyError):
    pass


class EmptyKeptSet(PbaError, ValueError):
    pass


class LimitExceeded(PbaError, ValueError):
    pass


class InvalidPba(PbaError, ValueError):
    pass


class InvalidState(PbaError, ValueError):
    pass


class NodeNotInPba(PbaError, ValueError):
    pass


class KsPropertyRequired(PbaError, ValueError):
    pass


# quantum
class DimMismatch(PbaError, ValueError):
    pass


class NotAProjection(PbaError, ValueError):
    pass


class InternalInconsistency(PbaError, RuntimeError):
    pass


# quotient
class NotAGeneratingSet(PbaError, ValueError):
    pass


class PropertyGViolated(PbaError, ValueError):
    pass


class IncompleteStates(PbaError, ValueError):
    pass


# extension
class InvalidThreeSpec(PbaError, ValueError):
    pass


class ChiEtaOutOfBox(PbaError, ValueError):
    pass


class OverlapMismatch(PbaError, ValueError):
    pass


class BlocksOverlap(PbaError, ValueError):
    pass


class NotAForest(PbaError, ValueError):
    pass


class NoRunningIntersectionOrder(PbaError, ValueError):
    pass


class WrongTopology(PbaError, ValueError):
    pass


# polytope
class InfeasibleBase(PbaError, ValueError):
    pass


# horn_tarski
class ValueOutOfBand(PbaError, ValueError):
    pass


class NotPartialMeasure(PbaError, ValueError):
    pass


class NotExtensible(PbaError, ValueError):
    """No measure on the full algebra reproduces the partial function."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


# cli
class ParseError(PbaError, ValueError):
    """Malformed input document."""


class MethodInapplicable(PbaError, ValueError):
    """The requested extension method does not fit the input's topology."""
