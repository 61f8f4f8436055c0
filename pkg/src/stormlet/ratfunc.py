"""Sparse multivariate polynomials and rational functions over the rationals.

This is the number type of the parametric domain: transition probabilities
become :class:`RationalFunction` values, and state elimination over this
type yields closed-form solution functions.

Cancellation is deliberately lightweight: common monomial content is
removed exactly and a proportionality shortcut catches the frequent
``num == c * den`` case, but no full multivariate GCD is attempted.
Results may therefore be non-reduced; equality is decided by
cross-multiplication, which is insensitive to that.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import EvaluationError

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _graded_lex_key(exponents):
    # graded lexicographic: total degree first, then lexicographic
    return (sum(exponents), exponents)


class Polynomial:
    """Sparse multivariate polynomial: exponent vector -> rational coefficient.

    ``variables`` is the sorted tuple of variable names actually occurring;
    exponent vectors are parallel to it.  Zero coefficients are never stored.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms):
        self.variables = tuple(variables)
        self.terms = {e: c for e, c in terms.items() if c != 0}
        self._prune_variables()

    def _prune_variables(self):
        """Drop variables with zero exponent in every term (canonical form)."""
        if not self.variables:
            return
        used = [
            i
            for i in range(len(self.variables))
            if any(e[i] for e in self.terms)
        ]
        if len(used) == len(self.variables):
            return
        self.variables = tuple(self.variables[i] for i in used)
        self.terms = {
            tuple(e[i] for i in used): c for e, c in self.terms.items()
        }

    @staticmethod
    def constant(value) -> "Polynomial":
        value = Fraction(value)
        if value == 0:
            return Polynomial((), {})
        return Polynomial((), {(): value})

    @staticmethod
    def variable(name: str) -> "Polynomial":
        return Polynomial((name,), {(1,): _ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.variables

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), _ZERO)

    def degree_in(self, var: str) -> int:
        if var not in self.variables:
            return 0
        i = self.variables.index(var)
        return max((e[i] for e in self.terms), default=0)

    def is_multiaffine(self) -> bool:
        """Degree at most one in every variable separately."""
        return all(x <= 1 for e in self.terms for x in e)

    def _aligned(self, other: "Polynomial"):
        if self.variables == other.variables:
            return self.variables, self.terms, other.terms
        merged = tuple(sorted(set(self.variables) | set(other.variables)))

        def remap(poly):
            idx = [poly.variables.index(v) if v in poly.variables else None for v in merged]
            return {
                tuple(0 if i is None else e[i] for i in idx): c
                for e, c in poly.terms.items()
            }

        return merged, remap(self), remap(other)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        merged, a, b = self._aligned(other)
        out = dict(a)
        for e, c in b.items():
            out[e] = out.get(e, _ZERO) + c
        return Polynomial(merged, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Polynomial) else Polynomial.constant(-Fraction(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return Polynomial(self.variables, {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        merged, a, b = self._aligned(other)
        out: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, _ZERO) + ca * cb
        return Polynomial(merged, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.constant(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def evaluate(self, point: dict) -> Fraction:
        """Evaluate at a full point (variable name -> Fraction)."""
        missing = [v for v in self.variables if v not in point]
        if missing:
            raise EvaluationError(f"no value for parameter(s) {', '.join(missing)}")
        total = _ZERO
        for e, c in self.terms.items():
            term = c
            for v, x in zip(self.variables, e):
                if x:
                    term *= Fraction(point[v]) ** x
            total += term
        return total

    def monomial_content(self):
        """Componentwise minimum exponent vector over all terms."""
        if not self.terms:
            return tuple(0 for _ in self.variables)
        return tuple(min(e[i] for e in self.terms) for i in range(len(self.variables)))

    def shift_down(self, exponents) -> "Polynomial":
        """Divide by the monomial with the given exponent vector."""
        return Polynomial(
            self.variables,
            {tuple(x - y for x, y in zip(e, exponents)): c for e, c in self.terms.items()},
        )

    def content(self) -> Fraction:
        """Positive rational content: gcd of numerators over lcm of denominators."""
        if not self.terms:
            return _ONE
        num_gcd = 0
        den_lcm = 1
        for c in self.terms.values():
            num_gcd = gcd(num_gcd, abs(c.numerator))
            den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
        return Fraction(num_gcd, den_lcm)

    def leading_coefficient(self) -> Fraction:
        if not self.terms:
            return _ZERO
        lead = max(self.terms, key=_graded_lex_key)
        return self.terms[lead]

    def proportional_to(self, other: "Polynomial"):
        """Return c with self == c * other, or None."""
        if other.is_zero():
            return None
        if self.is_zero():
            return _ZERO
        merged, a, b = self._aligned(other)
        if set(a) != set(b):
            return None
        ratio = None
        for e, c in a.items():
            r = c / b[e]
            if ratio is None:
                ratio = r
            elif r != ratio:
                return None
        return ratio

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_graded_lex_key, reverse=True):
            c = self.terms[e]
            factors = []
            for v, x in zip(self.variables, e):
                if x == 1:
                    factors.append(v)
                elif x > 1:
                    factors.append(f"{v}^{x}")
            mono = "*".join(factors)
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"Polynomial({self})"


class RationalFunction:
    """Quotient of two polynomials, denominator not identically zero.

    Canonical form: common monomial content cancelled, denominator scaled
    to content one with positive leading coefficient, and the shortcut
    ``num == c * den  =>  c`` applied.  Supports mixed arithmetic with
    ``int`` and :class:`~fractions.Fraction`.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial):
        if den.is_zero():
            raise EvaluationError("division by the zero polynomial")
        num, den = self._simplify(num, den)
        self.num = num
        self.den = den

    @staticmethod
    def _simplify(num, den):
        if num.is_zero():
            return Polynomial.constant(0), Polynomial.constant(1)
        # per-side monomial content, cancelled against each other
        merged, a, b = num._aligned(den)
        num = Polynomial(merged, a)
        den = Polynomial(merged, b)
        cn = num.monomial_content()
        cd = den.monomial_content()
        common = tuple(min(x, y) for x, y in zip(cn, cd))
        if any(common):
            num = num.shift_down(common)
            den = den.shift_down(common)
            cn = tuple(x - y for x, y in zip(cn, common))
            cd = tuple(x - y for x, y in zip(cd, common))
        # proportionality shortcut on the monomial-free parts
        ratio = num.shift_down(cn).proportional_to(den.shift_down(cd))
        if ratio is not None:
            mono_num = Polynomial(num.variables, {cn: Fraction(ratio.numerator)})
            mono_den = Polynomial(den.variables, {cd: Fraction(ratio.denominator)})
            num, den = mono_num, mono_den
        # sign/content normalization of the denominator
        scale = den.content()
        if den.leading_coefficient() < 0:
            scale = -scale
        if scale != 1:
            num = num * (1 / scale)
            den = den * (1 / scale)
        return num, den

    @staticmethod
    def constant(value) -> "RationalFunction":
        return RationalFunction(Polynomial.constant(value), Polynomial.constant(1))

    @staticmethod
    def variable(name: str) -> "RationalFunction":
        return RationalFunction(Polynomial.variable(name), Polynomial.constant(1))

    @staticmethod
    def _coerce(value):
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, (int, Fraction)):
            return RationalFunction.constant(value)
        return None

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num == self.den

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def is_multiaffine(self) -> bool:
        """Multi-affine polynomial: constant denominator, degree <= 1 per variable."""
        return self.den.is_constant() and self.num.is_multiaffine()

    @property
    def variables(self):
        return tuple(sorted(set(self.num.variables) | set(self.den.variables)))

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise EvaluationError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        # cross-multiplication: robust against non-reduced representations
        return self.num * other.den == other.num * self.den

    __hash__ = None  # cross-multiplied equality is incompatible with structural hashing

    def evaluate(self, point: dict) -> Fraction:
        den = self.den.evaluate(point)
        if den == 0:
            raise EvaluationError(f"denominator of {self} vanishes at {point}")
        return self.num.evaluate(point) / den

    def __str__(self):
        return f"({self.num})/({self.den})"

    def __repr__(self):
        return f"RationalFunction({self})"
