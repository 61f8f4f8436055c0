"""PCTL/CSL-style property parsing and normalization.

Grammar (one property per non-comment line, ``//`` comments, optional
``"name":`` prefixes)::

    P[min|max] (=? | ~ threshold) [ path ]
    R[{"reward"}][min|max] (=? | ~ threshold) [ path ]
    path  :=  X sf  |  sf U[<=b] sf  |  F[<=b] sf  |  G[<=b] sf
    sf    :=  boolean combination of "label" atoms and variable expressions

with ``~`` one of ``< <= > >=``.  Thresholds and bounds are exact
rationals.  A bound is read as a step bound on discrete-time models
(must be an integer) and as a time bound on CTMCs.

Out-of-subset constructs (multi-objective, conditional, long-run
average, cumulative/instantaneous reward, quantiles, nested P) are
rejected with an error naming the construct.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from . import expressions as ex
from .errors import ModelError, ParseError, UnsupportedFeatureError
from .expressions import _double_literal
from .lexer import DECIMAL, EOF, IDENT, INT, STRING, TokenStream, tokenize
from .prism import ExpressionParser


@dataclass(frozen=True)
class LabelAtom:
    """State-formula atom referring to a model label."""

    name: str


@dataclass(frozen=True)
class Next:
    target: object


@dataclass(frozen=True)
class Until:
    left: object
    right: object
    bound: Fraction | None = None


@dataclass(frozen=True)
class Eventually:
    target: object
    bound: Fraction | None = None


@dataclass(frozen=True)
class Globally:
    target: object
    bound: Fraction | None = None


@dataclass(frozen=True)
class Property:
    operator: str  # "P" | "R"
    path: object
    direction: str | None = None  # None | "min" | "max"
    bound: tuple | None = None  # (comparator, Fraction threshold)
    reward_name: str | None = None
    name: str | None = None
    complement: bool = False  # result = 1 - inner value (from G-duality)


_QUANTITATIVE_HEADS = {"P", "Pmin", "Pmax", "R", "Rmin", "Rmax"}
_COMPARATORS = ("<", "<=", ">", ">=")


class _StateFormulaParser(ExpressionParser):
    """Expression parser extended with label atoms and subset guards."""

    def _or(self):
        left = self._and()
        while self.stream.accept("|"):
            if self.stream.at("|"):
                raise UnsupportedFeatureError("conditional probability query")
            left = ex.Binary("|", left, self._and())
        return left

    def parse_atom(self):
        stream = self.stream
        tok = stream.current
        if tok.kind == STRING:
            stream.advance()
            return LabelAtom(tok.value)
        if tok.kind == IDENT and tok.text in _QUANTITATIVE_HEADS:
            nxt = stream.tokens[stream.pos + 1]
            if nxt.text in ("=", "<", "<=", ">", ">=", "{", "[", "min", "max"):
                raise UnsupportedFeatureError("nested P/R operator")
        if tok.kind == IDENT and tok.text == "multi":
            raise UnsupportedFeatureError("multi-objective query multi(...)")
        if tok.kind == IDENT and tok.text == "quantile":
            raise UnsupportedFeatureError("quantile query")
        return super().parse_atom()


def _parse_number(stream: TokenStream) -> Fraction:
    tok = stream.current
    if tok.kind == INT:
        stream.advance()
        return Fraction(tok.value)
    if tok.kind == DECIMAL:
        stream.advance()
        return tok.value
    raise stream.error(f"expected a number, got {tok.text!r}", expected=("number",))


def _parse_path(stream: TokenStream):
    def parse_bound():
        if stream.accept("<="):
            return _parse_number(stream)
        if stream.at("{"):
            raise UnsupportedFeatureError("cost-bounded path operator")
        return None

    tok = stream.current
    if tok.kind == IDENT and tok.text == "X":
        stream.advance()
        return Next(_StateFormulaParser(stream).parse())
    if tok.kind == IDENT and tok.text == "F":
        stream.advance()
        bound = parse_bound()
        return Eventually(_StateFormulaParser(stream).parse(), bound)
    if tok.kind == IDENT and tok.text == "G":
        stream.advance()
        bound = parse_bound()
        return Globally(_StateFormulaParser(stream).parse(), bound)
    if tok.kind == IDENT and tok.text == "C":
        raise UnsupportedFeatureError("cumulative reward operator C")
    if tok.kind == IDENT and tok.text == "I":
        raise UnsupportedFeatureError("instantaneous reward operator I")
    left = _StateFormulaParser(stream).parse()
    if stream.current.kind == IDENT and stream.current.text == "U":
        stream.advance()
        bound = parse_bound()
        right = _StateFormulaParser(stream).parse()
        return Until(left, right, bound)
    raise stream.error("expected a path formula", expected=("X", "F", "G", "U"))


def _parse_property(stream: TokenStream, name: str | None) -> Property:
    head = stream.current
    if head.kind != IDENT:
        raise stream.error("expected a property operator", expected=("P", "R"))
    if head.text in ("S", "LRA"):
        raise UnsupportedFeatureError("long-run average operator " + head.text)
    if head.text == "multi":
        raise UnsupportedFeatureError("multi-objective query multi(...)")
    if head.text == "quantile":
        raise UnsupportedFeatureError("quantile query")
    if head.text not in _QUANTITATIVE_HEADS:
        raise stream.error(f"unknown property operator {head.text!r}", expected=("P", "R"))
    stream.advance()
    operator = head.text[0]
    direction = None
    if head.text.endswith("min"):
        direction = "min"
    elif head.text.endswith("max"):
        direction = "max"
    reward_name = None
    if operator == "R" and stream.accept("{"):
        reward_name = stream.expect_kind(STRING, "reward structure name").value
        stream.expect("}")
        if stream.current.kind == IDENT and stream.current.text in ("min", "max"):
            if direction is not None:
                raise stream.error("direction given twice")
            direction = stream.advance().text
    bound = None
    if stream.accept("="):
        stream.expect("?")
    else:
        comparator = stream.expect(*_COMPARATORS).text
        threshold = _parse_number(stream)
        bound = (comparator, threshold)
    stream.expect("[")
    path = _parse_path(stream)
    if stream.at("|"):
        raise UnsupportedFeatureError("conditional probability query")
    stream.expect("]")
    return Property(
        operator=operator,
        path=path,
        direction=direction,
        bound=bound,
        reward_name=reward_name,
        name=name,
    )


def parse_property(text: str) -> Property:
    """Parse a single property string."""
    stream = TokenStream(tokenize(text))
    name = None
    if stream.at_kind(STRING) and stream.tokens[stream.pos + 1].text == ":":
        name = stream.advance().value
        stream.advance()
    prop = _parse_property(stream, name)
    stream.accept(";")
    if stream.current.kind != EOF:
        raise stream.error(f"trailing input {stream.current.text!r}", expected=("end of input",))
    return prop


def parse_properties(text: str) -> list[Property]:
    """Parse a ``.props``-style text: one property per non-comment line."""
    out = []
    for raw in text.splitlines():
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        out.append(parse_property(line))
    return out


def _fold_bool(sf):
    """Fold literal true/false through boolean connectives."""
    if isinstance(sf, ex.Unary) and sf.op == "!":
        inner = _fold_bool(sf.operand)
        if isinstance(inner, ex.Lit) and isinstance(inner.value, bool):
            return ex.Lit(not inner.value)
        return ex.Unary("!", inner)
    if isinstance(sf, ex.Binary) and sf.op in ("&", "|", "=>"):
        left = _fold_bool(sf.left)
        right = _fold_bool(sf.right)
        lval = left.value if isinstance(left, ex.Lit) and isinstance(left.value, bool) else None
        rval = right.value if isinstance(right, ex.Lit) and isinstance(right.value, bool) else None
        if sf.op == "&":
            if lval is False or rval is False:
                return ex.Lit(False)
            if lval is True:
                return right
            if rval is True:
                return left
        elif sf.op == "|":
            if lval is True or rval is True:
                return ex.Lit(True)
            if lval is False:
                return right
            if rval is False:
                return left
        else:  # =>
            if lval is False:
                return ex.Lit(True)
            if lval is True:
                return right
        return ex.Binary(sf.op, left, right)
    return sf


def _negate(sf):
    if isinstance(sf, ex.Lit) and isinstance(sf.value, bool):
        return ex.Lit(not sf.value)
    if isinstance(sf, ex.Unary) and sf.op == "!":
        return sf.operand
    return ex.Unary("!", sf)


def desugar(prop: Property) -> Property:
    """Normalize to Next/Until form.

    ``F phi`` becomes ``true U phi``; ``G phi`` becomes the complement of
    ``F !phi`` with the optimization direction flipped (the complement
    flag records that the result is one minus the inner value).
    Idempotent.
    """
    path = prop.path
    if isinstance(path, Eventually):
        path = Until(ex.Lit(True), _fold_bool(path.target), path.bound)
        return replace(prop, path=path)
    if isinstance(path, Globally):
        if prop.operator == "R":
            raise UnsupportedFeatureError("reward operator with G path formula")
        flipped = {None: None, "min": "max", "max": "min"}[prop.direction]
        path = Until(ex.Lit(True), _fold_bool(_negate(path.target)), path.bound)
        return replace(prop, path=path, direction=flipped, complement=not prop.complement)
    if isinstance(path, Until):
        return replace(prop, path=Until(_fold_bool(path.left), _fold_bool(path.right), path.bound))
    if isinstance(path, Next):
        return replace(prop, path=Next(_fold_bool(path.target)))
    raise ParseError(f"unknown path formula {path!r}")


def evaluate_state_formula(sf, model) -> frozenset:
    """Set of model states satisfying a state formula.

    Label atoms use the model labeling; variable expressions need state
    valuations (PRISM-built models carry them, explicit models do not).
    """
    n = model.state_count

    def holds(sf, state):
        if isinstance(sf, LabelAtom):
            return state in model.labeling.states_with(sf.name)
        if isinstance(sf, ex.Lit) and isinstance(sf.value, bool):
            return sf.value
        if isinstance(sf, ex.Unary) and sf.op == "!":
            return not holds(sf.operand, state)
        if isinstance(sf, ex.Binary) and sf.op in ("&", "|", "=>", "<=>"):
            left = holds(sf.left, state)
            right = holds(sf.right, state)
            return {
                "&": left and right,
                "|": left or right,
                "=>": (not left) or right,
                "<=>": left == right,
            }[sf.op]
        # leaf expression over state variables
        value = ex.evaluate(sf, model.valuation_env(state))
        if not isinstance(value, bool):
            raise ModelError(f"state formula {pretty_state_formula(sf)} is not boolean")
        return value

    return frozenset(s for s in range(n) if holds(sf, s))


def _pretty_bound(bound: Fraction | None) -> str:
    if bound is None:
        return ""
    if bound.denominator == 1:
        return f"<={bound.numerator}"
    return f"<={_double_literal(bound)}"


def pretty_state_formula(sf) -> str:
    if isinstance(sf, LabelAtom):
        return f'"{sf.name}"'
    if isinstance(sf, ex.Unary):
        return f"({sf.op}{pretty_state_formula(sf.operand)})"
    if isinstance(sf, ex.Binary):
        return f"({pretty_state_formula(sf.left)} {sf.op} {pretty_state_formula(sf.right)})"
    if isinstance(sf, ex.Ite):
        return f"({pretty_state_formula(sf.cond)} ? {pretty_state_formula(sf.then)} : {pretty_state_formula(sf.other)})"
    return ex.pretty(sf)


def pretty_path(path) -> str:
    if isinstance(path, Next):
        return f"X {pretty_state_formula(path.target)}"
    if isinstance(path, Eventually):
        return f"F{_pretty_bound(path.bound)} {pretty_state_formula(path.target)}"
    if isinstance(path, Globally):
        return f"G{_pretty_bound(path.bound)} {pretty_state_formula(path.target)}"
    if isinstance(path, Until):
        return (
            f"{pretty_state_formula(path.left)} U{_pretty_bound(path.bound)} "
            f"{pretty_state_formula(path.right)}"
        )
    raise ParseError(f"unknown path formula {path!r}")


def pretty_property(prop: Property, with_name: bool = True) -> str:
    head = prop.operator
    if prop.operator == "R" and prop.reward_name is not None:
        head += f'{{"{prop.reward_name}"}}'
    if prop.direction:
        head += prop.direction
    if prop.bound is None:
        head += "=?"
    else:
        comparator, threshold = prop.bound
        if threshold.denominator == 1:
            head += f"{comparator}{threshold.numerator}"
        else:
            head += f"{comparator}{_double_literal(threshold)}"
    text = f"{head} [ {pretty_path(prop.path)} ]"
    if prop.complement:
        text = f"1 - {text}"
    if with_name and prop.name is not None:
        text = f'"{prop.name}": {text}'
    return text
