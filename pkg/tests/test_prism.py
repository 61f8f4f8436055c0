from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from stormlet import expressions as ex
from stormlet.errors import EvaluationError, ParseError, UnsupportedFeatureError
from stormlet.prism import (
    parse_constant_bindings,
    parse_expression,
    parse_program,
    pretty_program,
    substitute_constants,
)

MODELS = Path(__file__).resolve().parents[1] / "src" / "stormlet" / "models"

MINIMAL = 'dtmc module m x : [0..1] init 0; [] x=0 -> 1:(x\'=1); endmodule'


def test_minimal_program():
    program = parse_program(MINIMAL)
    assert program.model_kind == "dtmc"
    assert len(program.modules) == 1
    module = program.modules[0]
    assert len(module.commands) == 1
    assert module.variables[0].name == "x"


def test_undefined_constant_parses_but_fails_at_build():
    text = "dtmc const int N; module m x : [0..1] init 0; [] x<N -> (x'=1); endmodule"
    program = parse_program(text)  # no error at parse time
    with pytest.raises(EvaluationError, match="undefined constant"):
        substitute_constants(program)


def test_renaming_clash_is_duplicate_identifier():
    text = (
        "dtmc "
        "module a x : [0..1] init 0; [] x=0 -> (x'=1); endmodule "
        "module b = a [x=x] endmodule"
    )
    with pytest.raises(ParseError, match="duplicate"):
        parse_program(text)


def test_renaming_is_simultaneous():
    text = (
        "dtmc "
        "module a x : [0..1] init 0; y : [0..1] init 0; [] x=0 & y=1 -> (x'=y); endmodule "
        "module b = a [x=y2, y=x2] endmodule"
    )
    program = parse_program(text)
    renamed = program.modules[1]
    assert [v.name for v in renamed.variables] == ["y2", "x2"]
    guard = renamed.commands[0].guard
    assert guard == ex.Binary("&", ex.Binary("=", ex.Var("y2"), ex.Lit(0)), ex.Binary("=", ex.Var("x2"), ex.Lit(1)))


def test_duplicate_module_name_rejected():
    text = (
        "dtmc module a x : [0..1] init 0; [] x=0 -> (x'=1); endmodule "
        "module a y : [0..1] init 0; [] y=0 -> (y'=1); endmodule"
    )
    with pytest.raises(ParseError, match="duplicate"):
        parse_program(text)


def test_unknown_model_kind():
    with pytest.raises(ParseError, match="unknown model kind"):
        parse_program("markovthing module m x : [0..1] init 0; endmodule")


def test_syntax_error_carries_position_and_expected():
    try:
        parse_program("dtmc\nmodule m\n x : [0..1 init 0;\nendmodule")
    except ParseError as err:
        assert err.line == 3
        assert err.expected
    else:
        pytest.fail("expected a ParseError")


def test_constant_folding_is_exact():
    text = "dtmc const double p = 1/10; module m x : [0..1] init 0; [] x=0 -> p:(x'=1) + 1-p:(x'=0); endmodule"
    program = substitute_constants(parse_program(text))
    weight = program.modules[0].commands[0].updates[0].weight
    assert weight == ex.Lit(Fraction(1, 10))
    # and 1/10 is not representable in binary floating point
    assert float(Fraction(1, 10)) != Fraction(1, 10)


def test_binding_type_mismatch():
    program = parse_program("dtmc const int N; module m x : [0..1] init 0; [] x<N -> (x'=1); endmodule")
    with pytest.raises(EvaluationError, match="int"):
        substitute_constants(program, {"N": True})


def test_binding_for_unknown_constant_rejected():
    program = parse_program(MINIMAL)
    with pytest.raises(EvaluationError, match="unknown constant"):
        substitute_constants(program, {"Z": 1})


def test_formula_expansion():
    text = (
        "dtmc formula two = 1 + 1; "
        "module m x : [0..3] init 0; [] x<two -> (x'=x+1); endmodule "
        'label "done" = x=two;'
    )
    program = parse_program(text)
    guard = program.modules[0].commands[0].guard
    assert ex.identifiers(guard) == {"x"}


def test_cyclic_formula_rejected():
    text = "dtmc formula a = b; formula b = a; module m x : [0..1] init 0; [] x=0 -> (x'=1); endmodule"
    with pytest.raises(ParseError, match="cyclic"):
        parse_program(text)


def test_unsupported_constructs_named():
    with pytest.raises(UnsupportedFeatureError, match="global"):
        parse_program("dtmc global g : [0..1]; module m x : [0..1] init 0; endmodule")
    with pytest.raises(UnsupportedFeatureError, match="model kind"):
        parse_program("pta module m x : [0..1] init 0; endmodule")


def test_parse_constant_bindings():
    out = parse_constant_bindings("N=3,p=0.1,flag=true")
    assert out == {"N": 3, "p": Fraction(1, 10), "flag": True}


def test_expression_precedence():
    e = parse_expression("1 + 2 * 3")
    assert ex.evaluate(e, {}) == 7
    e = parse_expression("!false & false")
    assert ex.evaluate(e, {}) is False  # ! binds tighter than &
    e = parse_expression("1 = 1 & 2 = 2")
    assert ex.evaluate(e, {}) is True  # comparison binds tighter than &
    e = parse_expression("x ? 1 : 0")
    assert ex.evaluate(e, {"x": True}) == 1


def test_division_is_exact_rational():
    assert ex.evaluate(parse_expression("1/3"), {}) == Fraction(1, 3)
    assert ex.evaluate(parse_expression("0.1 + 0.2"), {}) == Fraction(3, 10)


def test_constant_substitution_commutes_with_evaluation():
    # folding constants into expressions loses no precision in the exact domain
    text = (
        "dtmc const double p = 1/7; const double q = p*p + 3/14; "
        "module m x : [0..1] init 0; [] x=0 -> q:(x'=1) + 1-q:(x'=0); [] x=1 -> (x'=1); endmodule"
    )
    program = substitute_constants(parse_program(text))
    weight = program.modules[0].commands[0].updates[0].weight
    direct = Fraction(1, 7) ** 2 + Fraction(3, 14)
    assert weight == ex.Lit(direct)


@pytest.mark.parametrize(
    "name", ["die.pm", "herman3.pm", "brp.pm", "queue.pm", "exp_line.pm", "mdp_coins.pm",
             "mdp_detour.pm", "mdp_ec.pm", "mdp_zero_ec.pm", "ma_jobs.pm", "pdie.pm", "psmall.pm"]
)
def test_roundtrip_bundled_models(name):
    source = (MODELS / name).read_text()
    program = parse_program(source)
    assert parse_program(pretty_program(program)) == program


names = st.sampled_from(["x", "y1", "flag", "count_a"])
literals = st.one_of(
    st.integers(0, 999).map(ex.Lit),
    st.booleans().map(ex.Lit),
    st.tuples(st.integers(0, 99), st.sampled_from([2, 4, 5, 8, 10, 100])).map(
        lambda t: ex.Lit(Fraction(t[0], t[1]))
    ),
)


def expr_trees(depth=3):
    base = st.one_of(literals, names.map(ex.Var))
    if depth == 0:
        return base
    sub = expr_trees(depth - 1)
    return st.one_of(
        base,
        st.tuples(st.sampled_from(["-", "!"]), sub).map(lambda t: ex.Unary(*t)),
        st.tuples(
            st.sampled_from(["+", "-", "*", "/", "=", "!=", "<", "<=", ">", ">=", "&", "|", "=>", "<=>"]),
            sub,
            sub,
        ).map(lambda t: ex.Binary(*t)),
        st.tuples(sub, sub, sub).map(lambda t: ex.Ite(*t)),
        st.tuples(st.sampled_from(["min", "max", "pow"]), sub, sub).map(
            lambda t: ex.Call(t[0], (t[1], t[2]))
        ),
        st.tuples(st.sampled_from(["floor", "ceil"]), sub).map(lambda t: ex.Call(t[0], (t[1],))),
    )


@given(expr_trees())
@settings(max_examples=250)
def test_expression_pretty_parse_roundtrip(tree):
    assert parse_expression(ex.pretty(tree)) == tree


def test_kitchen_sink_grammar_coverage():
    # accepting case touching the remaining productions: bool variables,
    # function calls, implication/iff, negative literals, unnamed rewards
    text = """
    mdp
    const int N = 4;
    const double rate = 2.5;
    const bool enabled = true;
    formula mid = floor(N / 2);

    module sink
        on : bool init false;
        level : [0..4] init 0;

        [tick] enabled & !on -> 0.5 : (on'=true) & (level'=min(level + 1, N)) + 0.5 : true;
        [tick] on => level >= mid <=> true -> (level'=max(level - 1, 0));
        [] level = pow(2, 2) -> (on'=false);
    endmodule

    rewards
        !on : rate / 5;
        [tick] true : ceil(rate);
    endrewards

    label "topped" = level = N & on;
    """
    program = parse_program(text)
    assert parse_program(pretty_program(program)) == program
    bound = substitute_constants(program)
    assert bound.modules[0].variables[0].type == "bool"


def test_rejected_grammar_samples():
    # every production has a rejecting case
    bad = [
        "dtmc module m x : [0..1 init 0; endmodule",  # broken range
        "dtmc module m x : [0..1] init 0; [] x=0 -> (x''=1); endmodule",  # double prime
        "dtmc module m x : [0..1] init 0; [] -> (x'=1); endmodule",  # missing guard
        "dtmc const int = 3;",  # missing name
        "dtmc label stable = true;",  # label name must be quoted
        'dtmc rewards "r" true : ; endrewards',  # missing value
        "dtmc module m x : bool init 0; [] x=0 -> (x'=1); endmodule init x endinit",  # init twice
    ]
    for text in bad:
        with pytest.raises(ParseError):
            parse_program(text)
