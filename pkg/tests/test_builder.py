from fractions import Fraction
from pathlib import Path

import pytest

from stormlet import domains
from stormlet.builder import BuildOptions, build_model, enumerate_initial_states, expand_state
from stormlet.errors import BuildError
from stormlet.models import validate
from stormlet.prism import parse_program, substitute_constants

MODELS = Path(__file__).resolve().parents[1] / "src" / "stormlet" / "models"


def build(text_or_path, fix_deadlocks=False, domain=domains.EXACT, constants=None):
    if isinstance(text_or_path, Path):
        text_or_path = text_or_path.read_text()
    program = parse_program(text_or_path)
    return build_model(
        program,
        BuildOptions(fix_deadlocks=fix_deadlocks, number_domain=domain, constants=constants or {}),
    )


def test_minimal_program_with_deadlock_fix():
    model = build("dtmc module m x : [0..1] init 0; [] x=0 -> 1:(x'=1); endmodule", fix_deadlocks=True)
    assert model.state_count == 2
    assert model.transition_count == 2
    assert model.labeling.states_with("deadlock") == frozenset({1})


def test_deadlock_is_an_error_by_default():
    with pytest.raises(BuildError, match="deadlock"):
        build("dtmc module m x : [0..1] init 0; [] x=0 -> 1:(x'=1); endmodule")


def test_knuth_yao_die_shape():
    model = build(MODELS / "die.pm")
    assert model.state_count == 13
    assert model.transition_count == 20
    assert validate(model) is None
    assert model.initial_states == (0,)
    # exactly one state per face
    for face in ("one", "two", "three", "four", "five", "six"):
        assert len(model.labeling.states_with(face)) == 1


def test_herman3_shape():
    model = build(MODELS / "herman3.pm")
    assert model.state_count == 8
    assert len(model.initial_states) == 2
    assert model.labeling.states_with("stable")
    assert validate(model) is None


def test_brp_builds_and_validates():
    model = build(MODELS / "brp.pm", constants={"N": 16, "MAX": 2})
    assert validate(model) is None
    assert model.kind == "dtmc"
    assert model.state_count > 100
    assert model.labeling.states_with("error")


@pytest.mark.parametrize(
    "name,kind",
    [
        ("queue.pm", "ctmc"),
        ("exp_line.pm", "ctmc"),
        ("mdp_coins.pm", "mdp"),
        ("mdp_detour.pm", "mdp"),
        ("mdp_ec.pm", "mdp"),
        ("mdp_zero_ec.pm", "mdp"),
        ("ma_jobs.pm", "ma"),
    ],
)
def test_bundled_models_validate(name, kind):
    model = build(MODELS / name)
    assert model.kind == kind
    assert validate(model) is None


def test_out_of_range_update_reports_state():
    text = "dtmc module m x : [0..1] init 0; [] x<2 -> (x'=x+1); endmodule"
    with pytest.raises(BuildError, match=r"outside range"):
        build(text)


def test_probability_outside_unit_interval():
    text = "dtmc module m x : [0..1] init 0; [] x=0 -> 1.5:(x'=1) + -0.5:(x'=0); endmodule"
    with pytest.raises(BuildError, match=r"outside \[0,1\]"):
        build(text)


def test_dtmc_row_sum_must_be_one():
    text = "dtmc module m x : [0..1] init 0; [] x=0 -> 0.5:(x'=1); endmodule"
    with pytest.raises(BuildError, match="!= 1"):
        build(text)


def test_overlapping_dtmc_commands_mix_uniformly():
    text = (
        "dtmc module m x : [0..2] init 0; "
        "[] x=0 -> (x'=1); [] x=0 -> (x'=2); "
        "[] x>0 -> (x'=x); endmodule"
    )
    with pytest.warns(UserWarning, match="uniform"):
        model = build(text)
    row = dict(model.transitions.row(0))
    assert row == {1: Fraction(1, 2), 2: Fraction(1, 2)}


def test_enumerate_initial_states_by_predicate():
    text = "dtmc module m x : [0..2]; [] true -> (x'=x); endmodule init x=0 | x=2 endinit"
    program = substitute_constants(parse_program(text))
    assert enumerate_initial_states(program) == [(0,), (2,)]


def test_unsatisfiable_init_predicate():
    text = "dtmc module m x : [0..2]; [] true -> (x'=x); endmodule init x>5 endinit"
    with pytest.raises(BuildError, match="no satisfying"):
        build(text)


def test_expand_state_product_synchronization():
    text = (
        "mdp "
        "module a x : [0..1] init 0; [go] x=0 -> 0.5:(x'=0) + 0.5:(x'=1); endmodule "
        "module b y : [0..1] init 0; [go] y=0 -> 0.5:(y'=0) + 0.5:(y'=1); endmodule"
    )
    program = substitute_constants(parse_program(text))
    choices = expand_state(program, (0, 0))
    assert len(choices) == 1
    assert choices[0].action == "go"
    assert len(choices[0].branches) == 4
    assert all(w == Fraction(1, 4) for w, _ in choices[0].branches)


def test_sync_disabled_when_one_owner_blocked():
    text = (
        "mdp "
        "module a x : [0..1] init 0; [go] x=1 -> (x'=1); [] x=0 -> (x'=0); endmodule "
        "module b y : [0..1] init 0; [go] y=0 -> (y'=1); endmodule"
    )
    program = substitute_constants(parse_program(text))
    choices = expand_state(program, (0, 0))
    # only the silent self-loop of module a; [go] blocked because a cannot join
    assert len(choices) == 1
    assert choices[0].action is None


def test_silent_commands_do_not_synchronize():
    text = (
        "mdp "
        "module a x : [0..1] init 0; [] x=0 -> 0.5:(x'=0)+0.5:(x'=1); endmodule "
        "module b y : [0..1] init 0; [] y=0 -> (y'=1); endmodule"
    )
    program = substitute_constants(parse_program(text))
    choices = expand_state(program, (0, 0))
    assert len(choices) == 2


def test_ma_maximal_progress():
    # state 0 has both a Markovian and a probabilistic command: rates dropped
    text = (
        "ma module m x : [0..2] init 0; "
        "[] x=0 -> 3:(x'=1); [act] x=0 -> (x'=2); "
        "[] x=1 -> 1:(x'=1); [] x=2 -> 1:(x'=2); endmodule"
    )
    model = build(text)
    assert 0 not in model.markovian_states
    assert model.choices.choice_count(0) == 1
    ((succ, weight),) = list(model.transitions.row(0))
    assert model.state_valuations[succ] == (2,)
    assert weight == Fraction(1)


def test_ma_markovian_race():
    text = (
        "ma module m x : [0..2] init 0; "
        "[] x=0 -> 3:(x'=1); [] x=0 -> 2:(x'=2); "
        "[] x=1 -> 1:(x'=1); [] x=2 -> 1:(x'=2); endmodule"
    )
    model = build(text)
    assert 0 in model.markovian_states
    assert model.choices.choice_count(0) == 1
    assert dict(model.transitions.row(0)) == {1: Fraction(3), 2: Fraction(2)}
    assert model.exit_rates[0] == Fraction(5)


def test_ctmc_race_sums_rates():
    model = build(MODELS / "queue.pm")
    # state q=1 has both arrive (3/2) and serve (2) enabled
    init = model.initial_states[0]
    assert model.exit_rates[init] == Fraction(7, 2)


def test_deterministic_rebuild_bit_identical():
    a = build(MODELS / "brp.pm", constants={"N": 8, "MAX": 2})
    b = build(MODELS / "brp.pm", constants={"N": 8, "MAX": 2})
    assert a.transitions == b.transitions
    assert list(a.choices.state_offsets) == list(b.choices.state_offsets)
    assert a.labeling == b.labeling
    assert a.state_valuations == b.state_valuations


def test_unreferenced_label_does_not_change_matrix():
    base = build(MODELS / "die.pm")
    text = (MODELS / "die.pm").read_text() + '\nlabel "extra" = s=1;\n'
    extended = build(text)
    assert base.transitions == extended.transitions


def test_reachable_truncation():
    text = "dtmc module m x : [0..9] init 0; [] x=0 -> (x'=0); endmodule"
    model = build(text)
    assert model.state_count == 1


def test_float_domain_build():
    model = build(MODELS / "die.pm", domain=domains.FLOAT)
    assert model.domain == domains.FLOAT
    assert validate(model) is None


def test_reward_vectors():
    model = build(MODELS / "die.pm")
    rm = model.reward_model("coin_flips")
    assert rm.state_rewards is None
    assert rm.action_rewards is not None
    # every non-final state's single row collects reward 1
    total = sum(1 for r in rm.action_rewards if r == 1)
    assert total == 7
