"""
Exception hierarchy for wcolab.

Every domain error derives from LabError, itself a ValueError, so callers that only care about
"bad input" can keep catching ValueError. Scenario file access problems derive from OSError.
"""

from typing import Optional, Tuple


class LabError(ValueError):
    """Base class for domain errors."""


class InvalidTableError(LabError):
    """Composition table violates range, identity, inverse or associativity."""


class SizeLimitError(LabError):
    """Requested group exceeds the configured size limits."""


class NonAbelianGroupError(LabError):
    """Operation needs a commutative group."""


class EmptySubsetError(LabError):
    """Følner deficiency of an empty set."""


class ActionValidationError(LabError):
    """Action is not a permutation action or not a group homomorphism."""


class InvalidWeightsError(LabError):
    """Weights are not strictly positive or do not match the point count."""


class SpaceMismatchError(LabError):
    """Elements live over different measured spaces."""


class DimensionMismatchError(LabError):
    """Fiber dimensions or vector shapes do not agree."""


class NotFreeActionError(LabError):
    """Operation needs a (topologically) free action."""

    def __init__(self, message: str, witness: Optional[Tuple[int, int]] = None) -> None:
        super().__init__(message)
        self.witness = witness


class PatternViolationError(LabError):
    """Realized matrix has entries outside the orbit pattern."""


class UnsupportedExponentError(LabError):
    """Exponent is outside the set an operation can certify, or unparsable."""


class InfeasibleFreeActionError(LabError):
    """A free action on n points needs |G| to divide n."""


class ScenarioParseError(LabError):
    """Scenario file is not well-formed JSON."""


class ScenarioValidationError(LabError):
    """Scenario file violates a schema or module invariant."""


class UnknownCommandError(LabError):
    """Runner was asked for a command it does not know."""


class ScenarioIOError(OSError):
    """Scenario file could not be read or written."""
