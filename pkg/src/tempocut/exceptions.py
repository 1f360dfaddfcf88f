"""Exception hierarchy shared by every tempocut module."""


class TempocutError(Exception):
    """Base class for all library errors."""


class GraphValidationError(TempocutError, ValueError):
    """A temporal graph violates one of its structural invariants."""

    def __init__(self, message, snapshot=None, edge=None):
        super().__init__(message)
        self.snapshot = snapshot
        self.edge = edge


class DuplicateEdge(GraphValidationError):
    pass


class SelfLoop(GraphValidationError):
    pass


class NonPositiveWeight(GraphValidationError):
    pass


class VertexOutOfRange(GraphValidationError):
    pass


class ParseError(TempocutError, ValueError):
    """Malformed graph, label or signal file."""


class DimensionMismatch(TempocutError, ValueError):
    pass


class ShapeMismatch(TempocutError, ValueError):
    pass


class RankMismatch(TempocutError, ValueError):
    pass


class ConfigInvalid(TempocutError, ValueError):
    pass


class NotSymmetric(TempocutError, ValueError):
    pass


class DegenerateCut(TempocutError, ValueError):
    """The objective denominator of a cut is zero."""


class NoFeasiblePrefix(TempocutError):
    """Every prefix visited by a sweep had a zero denominator."""


class TooLarge(TempocutError):
    """Instance exceeds the brute-force enumeration cap."""


class NotConverged(TempocutError):
    """An iterative solver hit its iteration budget.

    ``result`` holds the best iterates found so far (a ``SpectrumResult`` for
    eigensolvers, the last iterate for linear solves).
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
