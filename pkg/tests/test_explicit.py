from fractions import Fraction
from pathlib import Path

import pytest

from stormlet import domains
from stormlet.checker import CheckSettings, check
from stormlet.errors import BuildError, ParseError
from stormlet.explicit_format import model_from_tables, parse_explicit
from stormlet.properties import parse_property

MODELS = Path(__file__).resolve().parents[1] / "src" / "stormlet" / "models"


def load(base, rew=False, domain=domains.EXACT, **kw):
    tra = (MODELS / f"{base}.tra").read_text()
    lab = (MODELS / f"{base}.lab").read_text()
    rew_text = (MODELS / f"{base}.rew").read_text() if rew else None
    tables = parse_explicit(tra, lab, rew_text)
    return tables, model_from_tables(tables, domain=domain, **kw)


def test_coin_three_states_four_transitions():
    tables, model = load("coin")
    assert tables.state_count == 3
    assert len(tables.transitions) == 4
    assert model.kind == "dtmc"
    result = check(model, parse_property('P=? [ F "t" ]'), CheckSettings(solver="exact-elimination", exact=True))
    assert result.value_at_initial == Fraction(1, 2)


def test_mdp_choices_per_state():
    tables, model = load("mdp2")
    assert model.kind == "mdp"
    assert model.choices.choice_count(0) == 2
    vmax = check(model, parse_property('Pmax=? [ F "t" ]'), CheckSettings(solver="policy-iteration", exact=True))
    vmin = check(model, parse_property('Pmin=? [ F "t" ]'), CheckSettings(solver="policy-iteration", exact=True))
    assert vmax.value_at_initial == Fraction(1, 2)
    assert vmin.value_at_initial == 0


def test_state_rewards_from_rew_file():
    tables, model = load("walk", rew=True)
    result = check(model, parse_property('R=? [ F "end" ]'), CheckSettings(solver="exact-elimination", exact=True))
    assert result.value_at_initial == Fraction(7)


def test_undeclared_label_rejected():
    tra = "dtmc\n0 0 1\n"
    lab = "#DECLARATION\ninit\n#END\n0 init undeclared\n"
    with pytest.raises(ParseError, match="undeclared"):
        parse_explicit(tra, lab)


def test_malformed_line_reports_number_and_content():
    tra = "dtmc\n0 1\n"
    lab = "#DECLARATION\ninit\n#END\n0 init\n"
    try:
        parse_explicit(tra, lab)
    except ParseError as err:
        assert err.line == 2
        assert "0 1" in str(err)
    else:
        pytest.fail("expected ParseError")


def test_probability_outside_unit_interval_rejected():
    tra = "dtmc\n0 1 1.5\n1 1 1\n"
    lab = "#DECLARATION\ninit\n#END\n0 init\n"
    with pytest.raises(ParseError, match=r"outside \[0,1\]"):
        parse_explicit(tra, lab)


def test_double_space_is_malformed():
    tra = "dtmc\n0  1 0.5\n"
    lab = "#DECLARATION\ninit\n#END\n0 init\n"
    with pytest.raises(ParseError, match="single-space"):
        parse_explicit(tra, lab)


def test_comments_and_state_count_from_max_index():
    tra = "dtmc # kind\n0 1 0.5 # split\n0 0 0.5\n1 1 1\n"
    lab = "#DECLARATION\ninit far\n#END\n0 init\n5 far\n"
    tables = parse_explicit(tra, lab)
    assert tables.state_count == 6  # the .lab mentions state 5


def test_deadlock_fixing_adds_label():
    tra = "dtmc\n0 1 1\n"
    lab = "#DECLARATION\ninit\n#END\n0 init\n"
    tables = parse_explicit(tra, lab)
    with pytest.raises(BuildError, match="deadlock"):
        model_from_tables(tables)
    model = model_from_tables(tables, fix_deadlocks=True)
    assert model.labeling.states_with("deadlock") == frozenset({1})


def test_missing_init_label_rejected():
    tra = "dtmc\n0 0 1\n"
    lab = "#DECLARATION\nother\n#END\n0 other\n"
    with pytest.raises(BuildError, match="init"):
        model_from_tables(parse_explicit(tra, lab))


def test_ctmc_rates_allowed_above_one():
    tra = "ctmc\n0 1 5.5\n1 0 2\n"
    lab = "#DECLARATION\ninit\n#END\n0 init\n"
    model = model_from_tables(parse_explicit(tra, lab))
    assert model.exit_rates[0] == Fraction(11, 2)


def test_mdp_choice_numbering_must_be_dense():
    tra = "mdp\n0 0 1 1\n0 2 1 1\n1 0 1 1\n"
    lab = "#DECLARATION\ninit\n#END\n0 init\n"
    with pytest.raises(BuildError, match="numbered"):
        model_from_tables(parse_explicit(tra, lab))


def test_slow_chain_loads():
    _, model = load("slow_chain", domain=domains.FLOAT)
    assert model.state_count == 22
    assert model.labeling.states_with("target") == frozenset({21})
