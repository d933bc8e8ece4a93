"""
Error types for the F4MS engine.

Every error carries a `category` string: the name diagnostics, reports and
CLI messages use for it. Validation never stops at the first problem; it
raises ValidationFailed with the complete list of Violations.
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple


class F4msError(Exception):
    """Base class for all errors raised by the engine and its tools."""

    category = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.category)
        self.message = message or self.category

    def describe(self) -> str:
        """Return '<category>: <message>'."""
        return f"{self.category}: {self.message}"


# =============================================================================
# Model / registry errors
# =============================================================================

class ModelError(F4msError):
    category = "ModelError"


class DuplicateBehavior(ModelError):
    category = "DuplicateBehavior"


class BehaviorNotFound(ModelError, KeyError):
    category = "NotFound"

    def __str__(self) -> str:
        return self.message


# =============================================================================
# Validation
# =============================================================================

@dataclass(frozen=True)
class Violation:
    """
    One broken invariant, with coordinates into the model.

    Attributes:
        category: Violation name (TagMismatch, Unreachable, ...)
        message: Human readable explanation
        component: Offending component id, if any
        connector: Offending connector id, if any
        edge: Index of the offending interaction edge, if any
        port: Offending port name, if any
        field: Offending field name (e.g. "costs.sw_time"), if any
    """
    category: str
    message: str
    component: Optional[str] = None
    connector: Optional[str] = None
    edge: Optional[int] = None
    port: Optional[str] = None
    field: Optional[str] = None

    def __str__(self) -> str:
        return f"{self.category}: {self.message}"


class ValidationFailed(F4msError, ValueError):
    """Raised with every violation found, never just the first."""

    category = "ValidationError"

    def __init__(self, violations: Iterable[Violation]):
        self.violations: List[Violation] = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:5])
        if len(self.violations) > 5:
            summary += f"; ... ({len(self.violations)} total)"
        super().__init__(summary)

    def categories(self) -> Tuple[str, ...]:
        """Return the violation categories in report order."""
        return tuple(v.category for v in self.violations)


# =============================================================================
# Engine errors
# =============================================================================

class EngineError(F4msError, RuntimeError):
    category = "EngineError"


class GuardNoMatch(EngineError):
    category = "GuardNoMatch"

    def __init__(self, connector: str, label: Optional[str]):
        self.connector = connector
        self.label = label
        super().__init__(f"connector {connector!r}: no branch labelled {label!r} and no default")


class StepLimitExceeded(EngineError):
    category = "StepLimitExceeded"

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"{limit} firings without reaching quiescence")


class MissingInput(EngineError):
    category = "MissingInput"

    def __init__(self, component: str, port: str):
        self.component = component
        self.port = port
        super().__init__(f"component {component!r} read unfed input port {port!r}")


class KindNotAllowed(EngineError):
    category = "KindNotAllowed"


class TagDiscipline(EngineError):
    category = "TagDiscipline"


# =============================================================================
# Partitioning errors
# =============================================================================

class PartitionError(F4msError):
    category = "PartitionError"


class InvalidMapping(PartitionError, ValueError):
    category = "InvalidMapping"


class NoFeasibleMapping(PartitionError):
    category = "NoFeasibleMapping"


class TooManyFreeComponents(PartitionError):
    category = "TooManyFreeComponents"
