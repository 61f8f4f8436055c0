"""Parser for the supported PRISM-language subset.

Supported: model kinds ``dtmc``/``ctmc``/``mdp``/``ma``; typed constants;
``formula``; ``label``; multiple modules with bounded-int and bool
variables; commands with action labels and full synchronization on shared
action names; module renaming by simultaneous textual identifier
substitution; reward structures with state items ``guard : expr;`` and
action items ``[act] guard : expr;``; a single ``init ... endinit``
predicate block.

Markov automata convention: in ``ma`` programs, unlabeled commands are
Markovian (update weights are exponential rates) and action-labeled
commands are probabilistic.

Operator precedence, loosest to tightest:
``?:``, ``<=>``, ``=>``, ``|``, ``&``, ``!``, comparisons, ``+ -``,
``* /``, unary ``-``.  Numeric literals are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from . import expressions as ex
from .errors import EvaluationError, ParseError, UnsupportedFeatureError
from .lexer import DECIMAL, EOF, IDENT, INT, STRING, Token, TokenStream, tokenize

MODEL_KINDS = ("dtmc", "ctmc", "mdp", "ma")

KEYWORDS = frozenset(
    MODEL_KINDS
    + (
        "const",
        "int",
        "double",
        "bool",
        "formula",
        "label",
        "module",
        "endmodule",
        "init",
        "endinit",
        "rewards",
        "endrewards",
        "true",
        "false",
        "min",
        "max",
        "floor",
        "ceil",
        "pow",
        "global",
        "system",
        "endsystem",
    )
)

_UNSUPPORTED_KEYWORDS = {
    "global": "global variables",
    "system": "system...endsystem composition",
}


@dataclass(frozen=True)
class Constant:
    name: str
    type: str  # int | double | bool
    value: object | None  # expression or None when undefined


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str  # int (bounded range) | bool
    low: object | None
    high: object | None
    init: object | None


@dataclass(frozen=True)
class Assignment:
    var: str
    expr: object


@dataclass(frozen=True)
class UpdateBranch:
    weight: object  # probability or rate expression
    assignments: tuple


@dataclass(frozen=True)
class Command:
    action: str | None  # None = silent
    guard: object
    updates: tuple


@dataclass(frozen=True)
class Module:
    name: str
    variables: tuple
    commands: tuple


@dataclass(frozen=True)
class RewardItem:
    is_action: bool
    action: str | None  # only meaningful when is_action
    guard: object
    value: object


@dataclass(frozen=True)
class RewardStruct:
    name: str | None
    items: tuple


@dataclass
class Program:
    model_kind: str
    constants: tuple = ()
    formulas: tuple = ()  # (name, expr) pairs, bodies fully expanded
    modules: tuple = ()
    labels: tuple = ()  # (name, expr) pairs
    reward_structs: tuple = ()
    init_predicate: object | None = None
    parameters: tuple = ()  # undefined double constants kept symbolic

    def variables(self) -> list[VarDecl]:
        out = []
        for module in self.modules:
            out.extend(module.variables)
        return out

    def var_types(self) -> dict:
        types = {c.name: c.type for c in self.constants}
        for v in self.variables():
            types[v.name] = "bool" if v.type == "bool" else "int"
        return types

    def constant_values(self) -> dict:
        """Literal values of all defined constants (post-substitution)."""
        out = {}
        for c in self.constants:
            if isinstance(c.value, ex.Lit):
                out[c.name] = c.value.value
        return out

    def undefined_constants(self) -> list[Constant]:
        return [c for c in self.constants if c.value is None]

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return (
            self.model_kind,
            self.constants,
            self.formulas,
            self.modules,
            self.labels,
            self.reward_structs,
            self.init_predicate,
            self.parameters,
        ) == (
            other.model_kind,
            other.constants,
            other.formulas,
            other.modules,
            other.labels,
            other.reward_structs,
            other.init_predicate,
            other.parameters,
        )


class ExpressionParser:
    """Recursive-descent expression parser over a token stream."""

    def __init__(self, stream: TokenStream):
        self.stream = stream

    def parse(self):
        return self._ite()

    def _ite(self):
        cond = self._iff()
        if self.stream.accept("?"):
            then = self._ite()
            self.stream.expect(":")
            other = self._ite()
            return ex.Ite(cond, then, other)
        return cond

    def _iff(self):
        left = self._implies()
        if self.stream.accept("<=>"):
            return ex.Binary("<=>", left, self._iff())
        return left

    def _implies(self):
        left = self._or()
        if self.stream.accept("=>"):
            return ex.Binary("=>", left, self._implies())
        return left

    def _or(self):
        left = self._and()
        while self.stream.accept("|"):
            left = ex.Binary("|", left, self._and())
        return left

    def _and(self):
        left = self._not()
        while self.stream.accept("&"):
            left = ex.Binary("&", left, self._not())
        return left

    def _not(self):
        if self.stream.accept("!"):
            return ex.Unary("!", self._not())
        return self._comparison()

    def _comparison(self):
        left = self._additive()
        while self.stream.at("=", "!=", "<", "<=", ">", ">="):
            op = self.stream.advance().text
            left = ex.Binary(op, left, self._additive())
        return left

    def _additive(self):
        left = self._multiplicative()
        while self.stream.at("+", "-"):
            op = self.stream.advance().text
            left = ex.Binary(op, left, self._multiplicative())
        return left

    def _multiplicative(self):
        left = self._unary()
        while self.stream.at("*", "/"):
            op = self.stream.advance().text
            left = ex.Binary(op, left, self._unary())
        return left

    def _unary(self):
        if self.stream.accept("-"):
            return ex.Unary("-", self._unary())
        return self.parse_atom()

    def parse_atom(self):
        stream = self.stream
        tok = stream.current
        if tok.kind == INT:
            stream.advance()
            return ex.Lit(tok.value)
        if tok.kind == DECIMAL:
            stream.advance()
            return ex.Lit(tok.value)
        if stream.accept("("):
            inner = self._ite()
            stream.expect(")")
            return inner
        if tok.kind == IDENT:
            if tok.text == "true":
                stream.advance()
                return ex.Lit(True)
            if tok.text == "false":
                stream.advance()
                return ex.Lit(False)
            if tok.text in ("min", "max", "pow"):
                stream.advance()
                stream.expect("(")
                first = self._ite()
                stream.expect(",")
                second = self._ite()
                stream.expect(")")
                return ex.Call(tok.text, (first, second))
            if tok.text in ("floor", "ceil"):
                stream.advance()
                stream.expect("(")
                arg = self._ite()
                stream.expect(")")
                return ex.Call(tok.text, (arg,))
            if tok.text in KEYWORDS:
                raise stream.error(f"keyword {tok.text!r} is not an expression", expected=("expression",))
            stream.advance()
            return ex.Var(tok.text)
        raise stream.error(
            f"unexpected {tok.text!r}" if tok.kind != EOF else "unexpected end of input",
            expected=("expression",),
        )


def parse_expression(text: str):
    """Parse a standalone expression (used by tests and tools)."""
    stream = TokenStream(tokenize(text))
    expr = ExpressionParser(stream).parse()
    if stream.current.kind != EOF:
        raise stream.error(f"trailing input {stream.current.text!r}", expected=("end of input",))
    return expr


class _ProgramParser:
    def __init__(self, tokens: list[Token]):
        self.stream = TokenStream(tokens)
        self.tokens = tokens
        self.module_spans: dict[str, tuple[int, int]] = {}
        self.value_names: set[str] = set()  # constants, formulas, variables
        self.module_names: set[str] = set()
        self.label_names: set[str] = set()
        self.reward_names: set[str] = set()

    def parse(self) -> Program:
        stream = self.stream
        kind_tok = stream.expect_kind(IDENT, "model kind")
        if kind_tok.text not in MODEL_KINDS:
            if kind_tok.text in ("pta", "pomdp", "smg"):
                raise UnsupportedFeatureError(f"model kind {kind_tok.text!r}")
            raise ParseError(
                f"unknown model kind {kind_tok.text!r}",
                kind_tok.line,
                kind_tok.column,
                expected=MODEL_KINDS,
            )
        constants: list[Constant] = []
        formulas: list[tuple[str, object]] = []
        modules: list[Module] = []
        labels: list[tuple[str, object]] = []
        rewards: list[RewardStruct] = []
        init_predicate = None
        while stream.current.kind != EOF:
            tok = stream.current
            if tok.text in _UNSUPPORTED_KEYWORDS:
                raise UnsupportedFeatureError(_UNSUPPORTED_KEYWORDS[tok.text])
            if tok.text == "const":
                constants.append(self._constant())
            elif tok.text == "formula":
                formulas.append(self._formula())
            elif tok.text == "label":
                labels.append(self._label())
            elif tok.text == "module":
                modules.append(self._module())
            elif tok.text == "rewards":
                rewards.append(self._rewards())
            elif tok.text == "init":
                if init_predicate is not None:
                    raise ParseError("duplicate init block", tok.line, tok.column)
                stream.advance()
                init_predicate = ExpressionParser(stream).parse()
                stream.expect("endinit")
            else:
                raise ParseError(
                    f"unexpected {tok.text!r}",
                    tok.line,
                    tok.column,
                    expected=("const", "formula", "label", "module", "rewards", "init"),
                )
        program = Program(
            model_kind=kind_tok.text,
            constants=tuple(constants),
            formulas=tuple(formulas),
            modules=tuple(modules),
            labels=tuple(labels),
            reward_structs=tuple(rewards),
            init_predicate=init_predicate,
        )
        return _expand_formulas(program)

    def _declare(self, namespace: set[str], name: str, tok: Token, what: str):
        if name in namespace:
            raise ParseError(f"duplicate {what} {name!r}", tok.line, tok.column)
        namespace.add(name)

    def _declare_value_name(self, name: str, tok: Token):
        if name in self.value_names:
            raise ParseError(f"duplicate identifier {name!r}", tok.line, tok.column)
        self.value_names.add(name)

    def _ident(self, what: str) -> Token:
        tok = self.stream.expect_kind(IDENT, what)
        if tok.text in KEYWORDS:
            raise ParseError(f"keyword {tok.text!r} cannot be used as {what}", tok.line, tok.column)
        return tok

    def _constant(self) -> Constant:
        stream = self.stream
        stream.expect("const")
        type_tok = stream.expect("int", "double", "bool")
        name_tok = self._ident("constant name")
        self._declare_value_name(name_tok.text, name_tok)
        value = None
        if stream.accept("="):
            value = ExpressionParser(stream).parse()
        stream.expect(";")
        return Constant(name_tok.text, type_tok.text, value)

    def _formula(self):
        stream = self.stream
        stream.expect("formula")
        name_tok = self._ident("formula name")
        self._declare_value_name(name_tok.text, name_tok)
        stream.expect("=")
        expr = ExpressionParser(stream).parse()
        stream.expect(";")
        return (name_tok.text, expr)

    def _label(self):
        stream = self.stream
        stream.expect("label")
        name_tok = stream.expect_kind(STRING, "label name")
        self._declare(self.label_names, name_tok.value, name_tok, "label")
        stream.expect("=")
        expr = ExpressionParser(stream).parse()
        stream.expect(";")
        return (name_tok.value, expr)

    def _module(self) -> Module:
        stream = self.stream
        stream.expect("module")
        name_tok = self._ident("module name")
        self._declare(self.module_names, name_tok.text, name_tok, "module")
        self._declare_value_name(name_tok.text, name_tok)
        if stream.accept("="):
            return self._renamed_module(name_tok.text)
        body_start = stream.pos
        variables, commands = self._module_body()
        self.module_spans[name_tok.text] = (body_start, stream.pos)
        stream.expect("endmodule")
        return Module(name_tok.text, tuple(variables), tuple(commands))

    def _renamed_module(self, new_name: str) -> Module:
        stream = self.stream
        source_tok = self._ident("source module name")
        if source_tok.text not in self.module_spans:
            raise ParseError(
                f"renaming references unknown module {source_tok.text!r} (must be defined earlier)",
                source_tok.line,
                source_tok.column,
            )
        stream.expect("[")
        mapping: dict[str, str] = {}
        while True:
            old_tok = self._ident("identifier")
            stream.expect("=")
            new_tok = self._ident("identifier")
            if old_tok.text in mapping:
                raise ParseError(f"identifier {old_tok.text!r} renamed twice", old_tok.line, old_tok.column)
            mapping[old_tok.text] = new_tok.text
            if not stream.accept(","):
                break
        stream.expect("]")
        stream.expect("endmodule")
        start, end = self.module_spans[source_tok.text]
        # simultaneous textual substitution on the identifier tokens of the body
        body = [
            tok.renamed(mapping[tok.text]) if tok.kind == IDENT and tok.text in mapping else tok
            for tok in self.tokens[start:end]
        ]
        body.append(Token(EOF, "", None, 0, 0))
        sub = _ProgramParser(body)
        sub.stream = TokenStream(body)
        sub.value_names = set()  # locals checked against the outer namespace below
        variables, commands = sub._module_body()
        module = Module(new_name, tuple(variables), tuple(commands))
        for var in variables:
            if var.name in self.value_names:
                raise ParseError(
                    f"duplicate identifier {var.name!r} produced by renaming of module {source_tok.text!r}"
                )
            self.value_names.add(var.name)
        return module

    def _module_body(self):
        stream = self.stream
        variables: list[VarDecl] = []
        commands: list[Command] = []
        while not stream.at("endmodule") and stream.current.kind != EOF:
            if stream.at("["):
                commands.append(self._command())
            else:
                variables.append(self._variable())
        return variables, commands

    def _variable(self) -> VarDecl:
        stream = self.stream
        name_tok = self._ident("variable name")
        self._declare_value_name(name_tok.text, name_tok)
        stream.expect(":")
        if stream.accept("bool"):
            var_type, low, high = "bool", None, None
        else:
            stream.expect("[")
            low = ExpressionParser(stream).parse()
            stream.expect("..")
            high = ExpressionParser(stream).parse()
            stream.expect("]")
            var_type = "int"
        init = None
        if stream.accept("init"):
            init = ExpressionParser(stream).parse()
        stream.expect(";")
        return VarDecl(name_tok.text, var_type, low, high, init)

    def _command(self) -> Command:
        stream = self.stream
        stream.expect("[")
        action = None
        if not stream.at("]"):
            action_tok = self._ident("action name")
            action = action_tok.text
        stream.expect("]")
        guard = ExpressionParser(stream).parse()
        stream.expect("->")
        updates = [self._update()]
        while stream.accept("+"):
            updates.append(self._update())
        stream.expect(";")
        return Command(action, guard, tuple(updates))

    def _update(self) -> UpdateBranch:
        stream = self.stream
        # an update is either "weight : assignments" or bare assignments (weight 1)
        mark = stream.pos
        weight = None
        try:
            candidate = ExpressionParser(stream).parse()
            if stream.accept(":"):
                weight = candidate
            else:
                stream.pos = mark
        except ParseError:
            stream.pos = mark
        if weight is None:
            weight = ex.Lit(1)
        assignments = self._assignments()
        return UpdateBranch(weight, tuple(assignments))

    def _assignments(self):
        stream = self.stream
        if stream.accept("true"):
            return []
        assignments = [self._assignment()]
        while stream.accept("&"):
            assignments.append(self._assignment())
        seen = set()
        for a in assignments:
            if a.var in seen:
                raise stream.error(f"variable {a.var!r} assigned twice in one update")
            seen.add(a.var)
        return assignments

    def _assignment(self) -> Assignment:
        stream = self.stream
        stream.expect("(")
        var_tok = self._ident("variable name")
        stream.expect("'")
        stream.expect("=")
        expr = ExpressionParser(stream).parse()
        stream.expect(")")
        return Assignment(var_tok.text, expr)

    def _rewards(self) -> RewardStruct:
        stream = self.stream
        stream.expect("rewards")
        name = None
        if stream.at_kind(STRING):
            name_tok = stream.advance()
            name = name_tok.value
            self._declare(self.reward_names, name, name_tok, "reward structure")
        items: list[RewardItem] = []
        while not stream.at("endrewards"):
            if stream.current.kind == EOF:
                raise stream.error("unterminated rewards block", expected=("endrewards",))
            if stream.accept("["):
                action = None
                if not stream.at("]"):
                    action = self._ident("action name").text
                stream.expect("]")
                guard = ExpressionParser(stream).parse()
                stream.expect(":")
                value = ExpressionParser(stream).parse()
                stream.expect(";")
                items.append(RewardItem(True, action, guard, value))
            else:
                guard = ExpressionParser(stream).parse()
                stream.expect(":")
                value = ExpressionParser(stream).parse()
                stream.expect(";")
                items.append(RewardItem(False, None, guard, value))
        stream.expect("endrewards")
        return RewardStruct(name, tuple(items))


def parse_program(text: str) -> Program:
    """Parse PRISM source into a :class:`Program`.

    Module renamings are expanded before command parsing; formula
    references are substituted into every expression.  Undefined
    constants are allowed here and reported at build time.
    """
    parser = _ProgramParser(tokenize(text))
    program = parser.parse()
    _check_program(program)
    return program


def _expand_formulas(program: Program) -> Program:
    formula_map = dict(program.formulas)
    if not formula_map:
        return program

    def expand(expr, depth=0):
        if depth > len(formula_map) + 1:
            raise ParseError("cyclic formula definitions")
        names = ex.identifiers(expr) & formula_map.keys()
        if not names:
            return expr
        return expand(ex.substitute(expr, {n: formula_map[n] for n in names}), depth + 1)

    resolved = {name: expand(body) for name, body in program.formulas}

    def expand_resolved(expr):
        if expr is None:
            return None
        names = ex.identifiers(expr) & resolved.keys()
        if not names:
            return expr
        return ex.substitute(expr, {n: resolved[n] for n in names})

    modules = tuple(
        Module(
            m.name,
            tuple(
                VarDecl(v.name, v.type, expand_resolved(v.low), expand_resolved(v.high), expand_resolved(v.init))
                for v in m.variables
            ),
            tuple(
                Command(
                    c.action,
                    expand_resolved(c.guard),
                    tuple(
                        UpdateBranch(
                            expand_resolved(u.weight),
                            tuple(Assignment(a.var, expand_resolved(a.expr)) for a in u.assignments),
                        )
                        for u in c.updates
                    ),
                )
                for c in m.commands
            ),
        )
        for m in program.modules
    )
    return replace(
        program,
        formulas=tuple((n, resolved[n]) for n, _ in program.formulas),
        modules=modules,
        labels=tuple((n, expand_resolved(e)) for n, e in program.labels),
        reward_structs=tuple(
            RewardStruct(
                r.name,
                tuple(
                    RewardItem(i.is_action, i.action, expand_resolved(i.guard), expand_resolved(i.value))
                    for i in r.items
                ),
            )
            for r in program.reward_structs
        ),
        init_predicate=expand_resolved(program.init_predicate),
    )


def _check_program(program: Program):
    if program.init_predicate is not None:
        for v in program.variables():
            if v.init is not None:
                raise ParseError(
                    f"variable {v.name!r} has an init value although the program has an init block"
                )
    for module in program.modules:
        local = {v.name for v in module.variables}
        for c in module.commands:
            for u in c.updates:
                for a in u.assignments:
                    if a.var not in local:
                        raise ParseError(
                            f"command in module {module.name!r} assigns to non-local variable {a.var!r}"
                        )


def substitute_constants(program: Program, bindings: dict | None = None, allow_undefined_doubles: bool = False) -> Program:
    """Resolve all constants to literals and fold them into every expression.

    ``bindings`` supplies values for constants left undefined in the file.
    With ``allow_undefined_doubles``, undefined double constants stay
    symbolic and are recorded as parameters (parametric builds).
    """
    bindings = dict(bindings or {})
    env: dict[str, object] = {}
    parameters: list[str] = []
    out_constants: list[Constant] = []
    for const in program.constants:
        if const.value is not None:
            expr = ex.fold(ex.substitute(const.value, {k: ex.Lit(v) for k, v in env.items()}))
            if not isinstance(expr, ex.Lit):
                free = sorted(ex.identifiers(expr))
                raise EvaluationError(
                    f"constant {const.name!r} depends on undefined constant(s) {', '.join(free)}"
                )
            value = _coerce_constant(const.name, const.type, expr.value)
        elif const.name in bindings:
            value = _coerce_constant(const.name, const.type, bindings.pop(const.name))
        elif allow_undefined_doubles and const.type == "double":
            parameters.append(const.name)
            out_constants.append(const)
            continue
        else:
            raise EvaluationError(f"undefined constant {const.name!r} (supply it with a binding)")
        env[const.name] = value
        out_constants.append(Constant(const.name, const.type, ex.Lit(value)))
    if bindings:
        unknown = ", ".join(sorted(bindings))
        raise EvaluationError(f"binding(s) for unknown constant(s): {unknown}")

    mapping = {name: ex.Lit(value) for name, value in env.items()}

    def subst(expr):
        if expr is None:
            return None
        return ex.fold(ex.substitute(expr, mapping))

    modules = tuple(
        Module(
            m.name,
            tuple(
                VarDecl(v.name, v.type, subst(v.low), subst(v.high), subst(v.init))
                for v in m.variables
            ),
            tuple(
                Command(
                    c.action,
                    subst(c.guard),
                    tuple(
                        UpdateBranch(
                            subst(u.weight),
                            tuple(Assignment(a.var, subst(a.expr)) for a in u.assignments),
                        )
                        for u in c.updates
                    ),
                )
                for c in m.commands
            ),
        )
        for m in program.modules
    )
    return replace(
        program,
        constants=tuple(out_constants),
        formulas=tuple((n, subst(e)) for n, e in program.formulas),
        modules=modules,
        labels=tuple((n, subst(e)) for n, e in program.labels),
        reward_structs=tuple(
            RewardStruct(
                r.name,
                tuple(RewardItem(i.is_action, i.action, subst(i.guard), subst(i.value)) for i in r.items),
            )
            for r in program.reward_structs
        ),
        init_predicate=subst(program.init_predicate),
        parameters=tuple(parameters),
    )


def _coerce_constant(name: str, const_type: str, value):
    if isinstance(value, ex.Lit):
        value = value.value
    if const_type == "bool":
        if not isinstance(value, bool):
            raise EvaluationError(f"constant {name!r} is bool but got {value!r}")
        return value
    if isinstance(value, bool):
        raise EvaluationError(f"constant {name!r} is {const_type} but got a bool")
    if const_type == "int":
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise EvaluationError(f"constant {name!r} is int but got {value}")
            value = int(value)
        if not isinstance(value, int):
            raise EvaluationError(f"constant {name!r} is int but got {value!r}")
        return value
    if const_type == "double":
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, Fraction):
            return value
        raise EvaluationError(f"constant {name!r} is double but got {value!r}")
    raise EvaluationError(f"unknown constant type {const_type!r}")


def parse_constant_bindings(text: str) -> dict:
    """Parse ``N=3,p=0.1,flag=true`` into a name -> literal dict."""
    out: dict[str, object] = {}
    if not text.strip():
        return out
    for part in text.split(","):
        if "=" not in part:
            raise ParseError(f"malformed constant binding {part!r}")
        name, _, raw = part.partition("=")
        name = name.strip()
        raw = raw.strip()
        if raw == "true":
            out[name] = True
        elif raw == "false":
            out[name] = False
        else:
            try:
                out[name] = int(raw)
            except ValueError:
                try:
                    out[name] = Fraction(raw)
                except ValueError as exc:
                    raise ParseError(f"malformed constant value {raw!r} for {name}") from exc
    return out


def pretty_program(program: Program) -> str:
    """Deterministic source rendering; ``parse(pretty(parse(s)))`` is stable."""
    lines = [program.model_kind, ""]
    for c in program.constants:
        decl = f"const {c.type} {c.name}"
        if c.value is not None:
            decl += f" = {ex.pretty(c.value)}"
        lines.append(decl + ";")
    for name, expr in program.formulas:
        lines.append(f"formula {name} = {ex.pretty(expr)};")
    for name, expr in program.labels:
        lines.append(f'label "{name}" = {ex.pretty(expr)};')
    for module in program.modules:
        lines.append("")
        lines.append(f"module {module.name}")
        for v in module.variables:
            if v.type == "bool":
                decl = f"    {v.name} : bool"
            else:
                decl = f"    {v.name} : [{ex.pretty(v.low)}..{ex.pretty(v.high)}]"
            if v.init is not None:
                decl += f" init {ex.pretty(v.init)}"
            lines.append(decl + ";")
        for c in module.commands:
            action = c.action or ""
            updates = " + ".join(_pretty_update(u) for u in c.updates)
            lines.append(f"    [{action}] {ex.pretty(c.guard)} -> {updates};")
        lines.append("endmodule")
    for r in program.reward_structs:
        lines.append("")
        lines.append(f'rewards "{r.name}"' if r.name else "rewards")
        for item in r.items:
            if item.is_action:
                lines.append(f"    [{item.action or ''}] {ex.pretty(item.guard)} : {ex.pretty(item.value)};")
            else:
                lines.append(f"    {ex.pretty(item.guard)} : {ex.pretty(item.value)};")
        lines.append("endrewards")
    if program.init_predicate is not None:
        lines.append("")
        lines.append(f"init {ex.pretty(program.init_predicate)} endinit")
    return "\n".join(lines) + "\n"


def _pretty_update(update: UpdateBranch) -> str:
    if update.assignments:
        body = " & ".join(f"({a.var}'={ex.pretty(a.expr)})" for a in update.assignments)
    else:
        body = "true"
    return f"{ex.pretty(update.weight)} : {body}"
