"""Exact rational scalars: parsing, formatting and decimal display.

All geometry, power and time values in this package are ``fractions.Fraction``
instances.  Files and wire formats carry them as strings, either decimal
("2.5", "-3") or explicit fractions ("29/10"), so round-trips are bit exact.
"""

from __future__ import annotations

from fractions import Fraction

Scalar = Fraction


def parse_scalar(text: str | int | Fraction) -> Fraction:
    """Parse a decimal or "num/den" string into an exact rational."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected scalar string, got {type(text).__name__}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"invalid scalar {text!r}") from exc


def format_scalar(value: Fraction) -> str:
    """Render exactly: "n" for integers, "num/den" otherwise."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Fraction, digits: int = 6) -> str:
    """Round-to-nearest decimal rendering with ``digits`` fractional digits."""
    value = Fraction(value)
    sign = "-" if value < 0 else ""
    value = abs(value)
    scaled = value * 10**digits
    units = scaled.numerator // scaled.denominator
    if 2 * (scaled.numerator % scaled.denominator) >= scaled.denominator:
        units += 1
    whole, frac = divmod(units, 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"
