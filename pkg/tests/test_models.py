from fractions import Fraction

import pytest

from stormlet import domains
from stormlet.errors import ModelError
from stormlet.models import (
    ChoiceStructure,
    Labeling,
    Model,
    RewardModel,
    embedded_dtmc,
    induced_untimed_mdp,
    uniformize,
    validate,
)
from stormlet.sparse import from_triplets


def dtmc(entries, n, labels=None, rewards=None, domain=domains.EXACT):
    matrix = from_triplets(n, entries, domain=domain)
    return Model(
        kind="dtmc",
        transitions=matrix,
        choices=ChoiceStructure.identity(n),
        labeling=Labeling(n, {k: frozenset(v) for k, v in (labels or {"init": {0}}).items()}),
        initial_states=(0,),
        rewards=rewards or {},
    )


def ctmc(entries, n):
    matrix = from_triplets(n, entries, domain=domains.EXACT)
    return Model(
        kind="ctmc",
        transitions=matrix,
        choices=ChoiceStructure.identity(n),
        labeling=Labeling(n, {"init": frozenset({0})}),
        initial_states=(0,),
        exit_rates=[matrix.row_sum(s) for s in range(n)],
    )


def test_validate_ok_two_state_chain():
    model = dtmc([(0, 1, Fraction(1)), (1, 1, Fraction(1))], 2)
    assert validate(model) is None


def test_validate_row_sum_violation():
    model = dtmc([(0, 1, Fraction(9, 10)), (1, 1, Fraction(1))], 2)
    violation = validate(model)
    assert violation is not None
    assert "sum" in violation.invariant
    assert violation.state == 0


def test_validate_negative_rate():
    model = ctmc([(0, 1, Fraction(-1)), (1, 0, Fraction(1))], 2)
    violation = validate(model)
    assert violation is not None
    assert "negative rate" in violation.invariant


def test_validate_float_tolerance():
    model = dtmc([(0, 1, 0.5), (0, 0, 0.5 + 5e-11), (1, 1, 1.0)], 2, domain=domains.FLOAT)
    assert validate(model) is None  # inside the 1e-10 tolerance
    model = dtmc([(0, 1, 0.5), (0, 0, 0.51), (1, 1, 1.0)], 2, domain=domains.FLOAT)
    assert validate(model) is not None


def test_validate_probability_outside_unit():
    model = dtmc([(0, 1, Fraction(3, 2)), (0, 0, Fraction(-1, 2)), (1, 1, Fraction(1))], 2)
    violation = validate(model)
    assert violation is not None


def test_embedded_single_rate():
    model = ctmc([(0, 1, Fraction(2))], 2)
    embedded = embedded_dtmc(model)
    assert embedded.kind == "dtmc"
    assert dict(embedded.transitions.row(0)) == {1: Fraction(1)}


def test_embedded_normalizes_rates():
    model = ctmc([(0, 1, Fraction(1)), (0, 2, Fraction(3)), (1, 1, Fraction(1)), (2, 2, Fraction(1))], 3)
    embedded = embedded_dtmc(model)
    assert dict(embedded.transitions.row(0)) == {1: Fraction(1, 4), 2: Fraction(3, 4)}


def test_embedded_absorbing_becomes_self_loop():
    model = ctmc([(0, 1, Fraction(2))], 2)  # state 1 has an empty rate row
    embedded = embedded_dtmc(model)
    assert dict(embedded.transitions.row(1)) == {1: Fraction(1)}
    assert validate(embedded) is None


def test_uniformize_rate_one_at_rate():
    model = ctmc([(0, 1, Fraction(1)), (1, 1, Fraction(1))], 2)
    uni = uniformize(model, Fraction(1))
    assert dict(uni.transitions.row(0)) == {1: Fraction(1)}


def test_uniformize_rate_one_at_two():
    model = ctmc([(0, 1, Fraction(1)), (1, 1, Fraction(1))], 2)
    uni = uniformize(model, Fraction(2))
    assert dict(uni.transitions.row(0)) == {0: Fraction(1, 2), 1: Fraction(1, 2)}


def test_uniformize_absorbing_self_loop():
    model = ctmc([(0, 1, Fraction(1))], 2)
    uni = uniformize(model, Fraction(5))
    assert dict(uni.transitions.row(1)) == {1: Fraction(1)}


def test_uniformize_rows_sum_to_one_exactly():
    model = ctmc([(0, 1, Fraction(3, 7)), (1, 0, Fraction(2, 3)), (1, 1, Fraction(1, 5))], 2)
    uni = uniformize(model, Fraction(2))
    for s in range(2):
        assert uni.transitions.row_sum(s) == 1


def test_uniformize_below_max_rate_rejected():
    model = ctmc([(0, 1, Fraction(4))], 2)
    with pytest.raises(ModelError, match="below"):
        uniformize(model, Fraction(2))


def test_uniformize_then_embed_max_rate_state_no_self_loop():
    model = ctmc([(0, 1, Fraction(3)), (1, 0, Fraction(1))], 2)
    uni = uniformize(model, Fraction(3))
    # state 0 has the maximal exit rate: self-loop probability 0
    assert 0 not in dict(uni.transitions.row(0))


def ma_model(markovian, entries, offsets, n, actions=None):
    matrix = from_triplets(offsets[-1], entries, columns=n, domain=domains.EXACT)
    return Model(
        kind="ma",
        transitions=matrix,
        choices=ChoiceStructure(offsets, actions or [None] * offsets[-1]),
        labeling=Labeling(n, {"init": frozenset({0})}),
        initial_states=(0,),
        markovian_states=frozenset(markovian),
        exit_rates=[matrix.row_sum(offsets[s]) if s in markovian else Fraction(0) for s in range(n)],
    )


def test_induced_purely_markovian_equals_embedded():
    model = ma_model({0, 1}, [(0, 1, Fraction(4)), (1, 1, Fraction(1))], [0, 1, 2], 2)
    mdp = induced_untimed_mdp(model)
    assert mdp.kind == "mdp"
    assert all(mdp.choices.choice_count(s) == 1 for s in range(2))
    assert dict(mdp.transitions.row(0)) == {1: Fraction(1)}


def test_induced_purely_probabilistic_identity():
    model = ma_model(
        set(),
        [(0, 1, Fraction(1)), (1, 1, Fraction(1, 2)), (1, 0, Fraction(1, 2)), (2, 1, Fraction(1))],
        [0, 2, 3],
        2,
        actions=["a", "b", None],
    )
    mdp = induced_untimed_mdp(model)
    assert mdp.transitions == model.transitions
    assert mdp.choices.action_labels == model.choices.action_labels


def test_induced_mixed_three_state():
    # state 0 probabilistic with two choices, state 1 Markovian (rates 2:1), state 2 absorbing
    entries = [
        (0, 1, Fraction(1)),
        (1, 2, Fraction(1)),
        (2, 2, Fraction(2)),
        (2, 0, Fraction(1)),
        (3, 2, Fraction(1)),
    ]
    model = ma_model({1}, entries, [0, 2, 3, 4], 3, actions=["go", "skip", None, None])
    mdp = induced_untimed_mdp(model)
    # hand computation: Markovian row normalized by exit rate 3
    assert dict(mdp.transitions.row(2)) == {2: Fraction(2, 3), 0: Fraction(1, 3)}
    assert mdp.choices.choice_count(0) == 2
    assert validate(mdp) is None


def test_reward_model_defaults():
    rm = RewardModel()
    assert rm.state_reward(0, domains.EXACT) == 0
    assert rm.action_reward(3, domains.FLOAT) == 0.0
