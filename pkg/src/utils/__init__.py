"""
Utilities package for the F4MS tools.

Provides shared helper functions for:
- Logging (Tee, LogManager)
- Exact decimal / micro-unit arithmetic
- Tree-syntax file persistence (utils.persistence, imported directly)
"""

from .logging import Tee, LogManager, BracketFormatter, log_success, verbosity_level
from .decimals import (
    fraction_digits,
    to_decimal,
    to_micro,
    from_micro,
    format_micro,
    parse_micro,
    format_decimal,
    format_fixed,
)

__all__ = [
    # Logging
    "Tee", "LogManager", "BracketFormatter", "log_success", "verbosity_level",
    # Decimals
    "fraction_digits", "to_decimal", "to_micro", "from_micro",
    "format_micro", "parse_micro", "format_decimal", "format_fixed",
]
