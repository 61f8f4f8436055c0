"""Number domains for model values.

Every model, system, and result is tagged with one of three domains:

* ``FLOAT``      -- IEEE binary64, the default working domain,
* ``EXACT``      -- arbitrary-precision rationals (:class:`fractions.Fraction`),
* ``PARAMETRIC`` -- multivariate rational functions over the rationals.

Model construction always happens in exact rationals first and converts
once at the end, so the float domain never parses text through floats.
"""

from __future__ import annotations

import math
from fractions import Fraction

FLOAT = "float"
EXACT = "exact"
PARAMETRIC = "parametric"

DOMAINS = (FLOAT, EXACT, PARAMETRIC)


class _Infinity:
    """Explicit extended value used by reward analyses in exact domains.

    Not a float sentinel: it only supports ordering against finite
    numbers and pretty-printing.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self or isinstance(other, _Infinity)

    def __gt__(self, other):
        return not isinstance(other, _Infinity) and other != math.inf

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return isinstance(other, _Infinity) or other == math.inf

    def __hash__(self):
        return hash(math.inf)


INF = _Infinity()


def is_infinite(value) -> bool:
    return value is INF or (isinstance(value, float) and math.isinf(value))


def convert(value: Fraction, domain: str):
    """Convert an exact rational into the requested domain."""
    if domain == FLOAT:
        return float(value)
    if domain == EXACT:
        return Fraction(value)
    if domain == PARAMETRIC:
        from .ratfunc import RationalFunction

        if isinstance(value, RationalFunction):
            return value
        return RationalFunction.constant(value)
    raise ValueError(f"unknown number domain {domain!r}")


def zero(domain: str):
    return convert(Fraction(0), domain)


def one(domain: str):
    return convert(Fraction(1), domain)


def is_zero(value) -> bool:
    """Domain-agnostic zero test (Fraction, float, or RationalFunction)."""
    from .ratfunc import RationalFunction

    if isinstance(value, RationalFunction):
        return value.is_zero()
    return value == 0


def one_like(value):
    """Multiplicative unit in the domain of ``value``."""
    from .ratfunc import RationalFunction

    if isinstance(value, RationalFunction):
        return RationalFunction.constant(1)
    if isinstance(value, Fraction):
        return Fraction(1)
    return 1.0
