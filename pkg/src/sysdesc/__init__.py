"""
System description package: the canonical tree syntax and the .f4ms schema.
"""

from .tree import (
    Diagnostic,
    SourceLocation,
    SystemDescriptionError,
    dumps,
    dumps_inline,
    loads,
    parse_tree,
)
from .system import (
    model_to_tree,
    parse_system,
    parse_system_file,
    serialize_system,
)

__all__ = [
    "Diagnostic", "SourceLocation", "SystemDescriptionError",
    "dumps", "dumps_inline", "loads", "parse_tree",
    "model_to_tree", "parse_system", "parse_system_file", "serialize_system",
]
