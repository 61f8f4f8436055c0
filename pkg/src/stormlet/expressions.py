"""Expression trees over int, double, and bool.

Numeric literals are exact rationals throughout; the float domain only
enters when a finished model is converted.  In parametric builds,
identifiers registered as parameters evaluate to rational functions,
which is only legal inside update probabilities (guards and assignments
must stay parameter-free and raise otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import EvaluationError
from .ratfunc import RationalFunction

INT = "int"
DOUBLE = "double"
BOOL = "bool"


@dataclass(frozen=True)
class Lit:
    value: object  # int | Fraction | bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # '-' | '!'
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / = != < <= > >= & | => <=>
    left: object
    right: object


@dataclass(frozen=True)
class Ite:
    cond: object
    then: object
    other: object


@dataclass(frozen=True)
class Call:
    fn: str  # min max floor ceil pow
    args: tuple


_ARITH = {"+", "-", "*", "/"}
_COMPARE = {"=", "!=", "<", "<=", ">", ">="}
_LOGIC = {"&", "|", "=>", "<=>"}


def lit_type(value) -> str:
    if isinstance(value, bool):
        return BOOL
    if isinstance(value, int):
        return INT
    if isinstance(value, Fraction):
        return DOUBLE
    raise EvaluationError(f"unsupported literal {value!r}")


def _join(a: str, b: str) -> str:
    if a == b:
        return a
    if {a, b} == {INT, DOUBLE}:
        return DOUBLE
    raise EvaluationError(f"type mismatch: {a} vs {b}")


def expr_type(expr, var_types: dict) -> str:
    """Infer the type of ``expr``; raises on ill-typed trees."""
    if isinstance(expr, Lit):
        return lit_type(expr.value)
    if isinstance(expr, Var):
        if expr.name not in var_types:
            raise EvaluationError(f"unknown identifier {expr.name!r}")
        return var_types[expr.name]
    if isinstance(expr, Unary):
        t = expr_type(expr.operand, var_types)
        if expr.op == "-":
            if t == BOOL:
                raise EvaluationError("unary minus on bool")
            return t
        if t != BOOL:
            raise EvaluationError("negation on non-bool")
        return BOOL
    if isinstance(expr, Binary):
        lt = expr_type(expr.left, var_types)
        rt = expr_type(expr.right, var_types)
        if expr.op in _ARITH:
            joined = _join(lt, rt)
            if joined == BOOL:
                raise EvaluationError(f"arithmetic {expr.op!r} on bool")
            return DOUBLE if expr.op == "/" else joined
        if expr.op in _COMPARE:
            if expr.op in ("=", "!=") and lt == rt == BOOL:
                return BOOL
            joined = _join(lt, rt)
            if joined == BOOL:
                raise EvaluationError(f"ordering {expr.op!r} on bool")
            return BOOL
        if expr.op in _LOGIC:
            if lt != BOOL or rt != BOOL:
                raise EvaluationError(f"logical {expr.op!r} on non-bool")
            return BOOL
        raise EvaluationError(f"unknown operator {expr.op!r}")
    if isinstance(expr, Ite):
        if expr_type(expr.cond, var_types) != BOOL:
            raise EvaluationError("ite condition must be bool")
        return _join(expr_type(expr.then, var_types), expr_type(expr.other, var_types))
    if isinstance(expr, Call):
        arg_types = [expr_type(a, var_types) for a in expr.args]
        if expr.fn in ("min", "max"):
            out = arg_types[0]
            for t in arg_types[1:]:
                out = _join(out, t)
            if out == BOOL:
                raise EvaluationError(f"{expr.fn} on bool")
            return out
        if expr.fn in ("floor", "ceil"):
            if arg_types[0] == BOOL:
                raise EvaluationError(f"{expr.fn} on bool")
            return INT
        if expr.fn == "pow":
            joined = _join(arg_types[0], arg_types[1])
            if joined == BOOL:
                raise EvaluationError("pow on bool")
            return joined
        raise EvaluationError(f"unknown function {expr.fn!r}")
    raise EvaluationError(f"not an expression: {expr!r}")


def evaluate(expr, env: dict, parameters: frozenset | None = None):
    """Evaluate under ``env``; identifiers in ``parameters`` become variables.

    Returns int, bool, Fraction, or RationalFunction (parametric case).
    """
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        if expr.name in env:
            return env[expr.name]
        if parameters and expr.name in parameters:
            return RationalFunction.variable(expr.name)
        raise EvaluationError(f"no value for identifier {expr.name!r}")
    if isinstance(expr, Unary):
        val = evaluate(expr.operand, env, parameters)
        if expr.op == "-":
            return -val
        _require_bool(val, "!")
        return not val
    if isinstance(expr, Binary):
        op = expr.op
        if op in _LOGIC:
            left = evaluate(expr.left, env, parameters)
            _require_bool(left, op)
            # short-circuit where the semantics allow it
            if op == "&" and not left:
                return False
            if op == "|" and left:
                return True
            if op == "=>" and not left:
                return True
            right = evaluate(expr.right, env, parameters)
            _require_bool(right, op)
            if op == "<=>":
                return left == right
            return bool(right) if op in ("&", "|", "=>") else None
        left = evaluate(expr.left, env, parameters)
        right = evaluate(expr.right, env, parameters)
        if op in _ARITH:
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if isinstance(left, RationalFunction) or isinstance(right, RationalFunction):
                return left / right
            if right == 0:
                raise EvaluationError("division by zero")
            return Fraction(left) / Fraction(right)
        if op in _COMPARE:
            if isinstance(left, RationalFunction) or isinstance(right, RationalFunction):
                raise EvaluationError("cannot compare parametric values")
            return {
                "=": left == right,
                "!=": left != right,
                "<": left < right,
                "<=": left <= right,
                ">": left > right,
                ">=": left >= right,
            }[op]
        raise EvaluationError(f"unknown operator {op!r}")
    if isinstance(expr, Ite):
        cond = evaluate(expr.cond, env, parameters)
        _require_bool(cond, "ite")
        return evaluate(expr.then if cond else expr.other, env, parameters)
    if isinstance(expr, Call):
        args = [evaluate(a, env, parameters) for a in expr.args]
        if any(isinstance(a, RationalFunction) for a in args):
            raise EvaluationError(f"{expr.fn} on parametric values")
        if expr.fn == "min":
            return min(args)
        if expr.fn == "max":
            return max(args)
        if expr.fn == "floor":
            return math.floor(args[0])
        if expr.fn == "ceil":
            return math.ceil(args[0])
        if expr.fn == "pow":
            base, exp = args
            if isinstance(exp, int) and not isinstance(exp, bool) and exp >= 0:
                return base**exp
            if isinstance(exp, int) and exp < 0:
                return Fraction(1) / (Fraction(base) ** (-exp))
            raise EvaluationError("pow exponent must be an integer")
        raise EvaluationError(f"unknown function {expr.fn!r}")
    raise EvaluationError(f"not an expression: {expr!r}")


def _require_bool(value, where: str):
    if not isinstance(value, bool):
        raise EvaluationError(f"{where} expects bool, got {value!r}")


def substitute(expr, mapping: dict):
    """Replace identifiers by expressions (simultaneous, non-recursive)."""
    if isinstance(expr, Lit):
        return expr
    if isinstance(expr, Var):
        return mapping.get(expr.name, expr)
    if isinstance(expr, Unary):
        return Unary(expr.op, substitute(expr.operand, mapping))
    if isinstance(expr, Binary):
        return Binary(expr.op, substitute(expr.left, mapping), substitute(expr.right, mapping))
    if isinstance(expr, Ite):
        return Ite(
            substitute(expr.cond, mapping),
            substitute(expr.then, mapping),
            substitute(expr.other, mapping),
        )
    if isinstance(expr, Call):
        return Call(expr.fn, tuple(substitute(a, mapping) for a in expr.args))
    raise EvaluationError(f"not an expression: {expr!r}")


def identifiers(expr) -> set[str]:
    if isinstance(expr, Lit):
        return set()
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Unary):
        return identifiers(expr.operand)
    if isinstance(expr, Binary):
        return identifiers(expr.left) | identifiers(expr.right)
    if isinstance(expr, Ite):
        return identifiers(expr.cond) | identifiers(expr.then) | identifiers(expr.other)
    if isinstance(expr, Call):
        out: set[str] = set()
        for a in expr.args:
            out |= identifiers(a)
        return out
    raise EvaluationError(f"not an expression: {expr!r}")


def fold(expr):
    """Evaluate every closed subtree to a literal (constant folding)."""
    if isinstance(expr, (Lit, Var)):
        return expr
    if isinstance(expr, Unary):
        inner = fold(expr.operand)
        out = Unary(expr.op, inner)
    elif isinstance(expr, Binary):
        out = Binary(expr.op, fold(expr.left), fold(expr.right))
    elif isinstance(expr, Ite):
        out = Ite(fold(expr.cond), fold(expr.then), fold(expr.other))
    elif isinstance(expr, Call):
        out = Call(expr.fn, tuple(fold(a) for a in expr.args))
    else:
        raise EvaluationError(f"not an expression: {expr!r}")
    if not identifiers(out):
        return Lit(evaluate(out, {}))
    return out


def pretty(expr) -> str:
    """Deterministic fully-parenthesized rendering (round-trip stable)."""
    if isinstance(expr, Lit):
        v = expr.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, Fraction):
            return _double_literal(v)
        return str(v)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Unary):
        return f"({expr.op}{pretty(expr.operand)})"
    if isinstance(expr, Binary):
        return f"({pretty(expr.left)} {expr.op} {pretty(expr.right)})"
    if isinstance(expr, Ite):
        return f"({pretty(expr.cond)} ? {pretty(expr.then)} : {pretty(expr.other)})"
    if isinstance(expr, Call):
        return f"{expr.fn}({', '.join(pretty(a) for a in expr.args)})"
    raise EvaluationError(f"not an expression: {expr!r}")


def _double_literal(v: Fraction) -> str:
    """Exact decimal text when the denominator is 2^a*5^b, else a quotient.

    Double literals always keep a decimal point so re-parsing yields a
    double again (round-trip stability).
    """
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"({v.numerator}/{v.denominator})"
    k = max(twos, fives)
    scaled = v.numerator * 10**k // v.denominator
    digits = str(abs(scaled)).rjust(k + 1, "0")
    sign = "-" if scaled < 0 else ""
    if k == 0:
        return f"{sign}{digits}.0"
    return f"{sign}{digits[:-k]}.{digits[-k:]}"
