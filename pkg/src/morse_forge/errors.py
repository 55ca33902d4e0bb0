"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``tag`` so the CLI and the
cancellation gate can report which check failed.
"""


class MorseError(Exception):
    tag = "MorseError"


# complex
class ComplexError(MorseError):
    tag = "ComplexError"


class DuplicateCell(ComplexError):
    tag = "DuplicateCell"


class DanglingVertexIndex(ComplexError):
    tag = "DanglingVertexIndex"


class NonManifoldEdge(ComplexError):
    tag = "NonManifoldEdge"


class DegenerateSimplex(ComplexError):
    tag = "DegenerateSimplex"


class UnknownCell(MorseError):
    tag = "UnknownCell"


# field
class FieldError(MorseError):
    tag = "FieldError"


class LengthMismatch(FieldError):
    tag = "LengthMismatch"


class NonFiniteValue(FieldError):
    tag = "NonFiniteValue"


# gradient
class CycleDetected(MorseError):
    tag = "CycleDetected"


class IndexMismatch(MorseError):
    tag = "IndexMismatch"


# cancel
class NotCritical(MorseError):
    tag = "NotCritical"


class StalePlan(MorseError):
    tag = "StalePlan"


class FrontierConflict(MorseError):
    tag = "FrontierConflict"

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class EndpointOrder(MorseError):
    tag = "EndpointOrder"


class MarginNotMonotone(MorseError):
    tag = "MarginNotMonotone"


class OrbitBelowLevelMissing(MorseError):
    tag = "OrbitBelowLevelMissing"


class BudgetTooTight(MorseError):
    tag = "BudgetTooTight"


class NonMonotoneCensus(MorseError):
    tag = "NonMonotoneCensus"


# io
class ParseError(MorseError):
    tag = "ParseError"


class InvariantViolation(MorseError):
    tag = "InvariantViolation"
