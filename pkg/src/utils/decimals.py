"""
Exact decimal helpers.

Costs are written with at most six fractional digits and simulated time is
kept in integer micro-units, so nothing here ever touches a float.
"""

from decimal import Decimal, ROUND_HALF_EVEN
from fractions import Fraction
from typing import Union

from constants.kinds import MICRO_UNITS, MAX_FRACTION_DIGITS


Number = Union[int, Decimal, Fraction]

_SIX_PLACES = Decimal(1).scaleb(-MAX_FRACTION_DIGITS)


def fraction_digits(value: Decimal) -> int:
    """Return how many fractional digits a decimal literal carries."""
    exponent = value.as_tuple().exponent
    return -exponent if isinstance(exponent, int) and exponent < 0 else 0


def to_decimal(value: Number) -> Decimal:
    """Convert an int/Decimal (or exact Fraction) to a Decimal."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, Fraction):
        return Decimal(value.numerator) / Decimal(value.denominator)
    return Decimal(value)


def to_micro(value: Number) -> int:
    """
    Convert a quantity in units to integer micro-units.

    Args:
        value: Quantity with at most six fractional digits

    Returns:
        The quantity scaled by 10^6

    Raises:
        ValueError: If the quantity is finer than one micro-unit
    """
    scaled = Fraction(value) * MICRO_UNITS
    if scaled.denominator != 1:
        raise ValueError(f"{value} has more than {MAX_FRACTION_DIGITS} fractional digits")
    return int(scaled)


def from_micro(micro: int) -> Decimal:
    """Convert integer micro-units back to an exact Decimal."""
    return Decimal(micro).scaleb(-MAX_FRACTION_DIGITS).normalize() if micro else Decimal(0)


def format_micro(micro: int) -> str:
    """Print micro-units as a decimal with exactly six fractional digits."""
    sign = "-" if micro < 0 else ""
    micro = abs(micro)
    return f"{sign}{micro // MICRO_UNITS}.{micro % MICRO_UNITS:06d}"


def parse_micro(text: str) -> int:
    """Inverse of format_micro."""
    return to_micro(Decimal(text))


def format_decimal(value: Number) -> str:
    """
    Canonical decimal text: no exponent, no trailing zeros, integer when exact.

    Fractions that do not terminate within six digits are rounded half-even.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        value = (Decimal(value.numerator) / Decimal(value.denominator)).quantize(
            _SIX_PLACES, rounding=ROUND_HALF_EVEN)
    value = to_decimal(value)
    if value == value.to_integral_value():
        return str(int(value))
    text = format(value.normalize(), "f")
    return text


def format_fixed(value: Number) -> str:
    """Print any exact number rounded half-even to six fractional digits."""
    exact = Fraction(value)
    rounded = (Decimal(exact.numerator) / Decimal(exact.denominator)).quantize(
        _SIX_PLACES, rounding=ROUND_HALF_EVEN)
    return format(rounded, "f")
