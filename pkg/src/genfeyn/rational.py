"""Exact rational parsing and formatting for the JSON interfaces."""

from fractions import Fraction
import re

from .errors import ConfigError

_RATIONAL = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")


def parse_rational(text):
    """Parse ``"p/q"`` or an integer string into a Fraction.

    Plain ints are accepted too. Floats and decimal strings are rejected
    because they would smuggle rounding into an exact computation.
    """
    if isinstance(text, bool):
        raise ConfigError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str) or not _RATIONAL.match(text):
        raise ConfigError(f"not an exact rational string: {text!r}")
    try:
        return Fraction(text.replace(" ", ""))
    except ZeroDivisionError:
        raise ConfigError(f"zero denominator: {text!r}") from None


def format_rational(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
