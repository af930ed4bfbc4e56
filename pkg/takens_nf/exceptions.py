"""Exceptions for the takens_nf package.

Every exception derives from ``TakensNFException`` and may carry a ``witness``: the concrete data (an index, a
multi-index, an offending interval) that made the operation fail. Subclasses of ``MathematicalPreconditionError``
signal that a hypothesis of the reduction does not hold for the given system, as opposed to misuse of the tool.
"""
from typing import Any


class TakensNFException(Exception):
    """
    Base exception of the package.

    You can access ``ex.witness`` to inspect the data that triggered the failure (``None`` when there is nothing
    more specific than the message).

    """

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class OutOfWindowError(TakensNFException):
    """Raised when an index falls outside the sampled window of a sequence."""


class FamilyError(TakensNFException):
    """Raised for an unknown builtin family or invalid family parameters."""


class InvertibilityError(TakensNFException):
    """Raised when a matrix of the cocycle is singular or too ill-conditioned to invert."""


class ProjectionRankError(TakensNFException):
    """Raised when projection ranks are inconsistent across the window."""


class WindowTooSmallError(TakensNFException):
    """Raised when the window cannot accommodate the requested tolerance or test widths."""


class SpectrumInconsistencyError(TakensNFException):
    """Raised when the spectrum computation produces an impossible result."""


class IntervalOverlapError(TakensNFException):
    """Raised when spectral intervals overlap, e.g. after inflation."""


class EnumerationBudgetError(TakensNFException):
    """Raised when a multi-index enumeration exceeds the allowed budget."""


class SplittingError(TakensNFException):
    """Raised when invariant subspaces cannot be separated reliably."""


class ArityError(TakensNFException):
    """Raised when jets are combined with mismatching variable counts or dimensions."""


class JetOrderError(TakensNFException):
    """Raised when a jet violates its order bookkeeping."""


class ConditioningError(TakensNFException):
    """Raised when a series solver would run with a contraction rate too close to one."""


class DivergenceError(TakensNFException):
    """Raised when a series does not show decreasing terms."""


class MathematicalPreconditionError(TakensNFException):
    """Base class for failures of the hypotheses of the reduction (non-resonance, gaps, stage checks)."""


class NonResonanceViolation(MathematicalPreconditionError):
    """Raised when a non-resonance condition fails. The witness is the offending multi-index."""


class GapViolation(MathematicalPreconditionError):
    """Raised when a spectral gap condition fails. The witness holds the margins."""


class StageError(MathematicalPreconditionError):
    """Raised when a stage of the normal form pipeline fails.

    Attributes:
        stage (str): Identifier of the failing stage, e.g. ``center-2``.
    """

    def __init__(self, message: str, stage: str, witness: Any = None):
        super().__init__(message, witness)
        self.stage = stage
