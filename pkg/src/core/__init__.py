"""
Core package for the F4MS engine.

Provides the component model and error types. The graph, engine and trace
modules are imported directly (core.graph, core.engine, core.trace).
"""

from .errors import F4msError, ValidationFailed, Violation
from .model import (
    Behavior,
    BehaviorCall,
    BehaviorRegistry,
    BehaviorResult,
    ComponentSpec,
    CostAnnotation,
    Message,
    PortSpec,
    validate_component,
)

__all__ = [
    "F4msError", "ValidationFailed", "Violation",
    "Behavior", "BehaviorCall", "BehaviorRegistry", "BehaviorResult",
    "ComponentSpec", "CostAnnotation", "Message", "PortSpec",
    "validate_component",
]
