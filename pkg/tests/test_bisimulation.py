from fractions import Fraction
from pathlib import Path

import pytest

from stormlet import domains
from stormlet.bisimulation import initial_partition, minimize, quotient, refine
from stormlet.builder import BuildOptions, build_model
from stormlet.checker import CheckSettings, check
from stormlet.models import ChoiceStructure, Labeling, Model
from stormlet.prism import parse_program
from stormlet.properties import parse_property
from stormlet.sparse import from_triplets

MODELS = Path(__file__).resolve().parents[1] / "src" / "stormlet" / "models"


def build(name, constants=None, domain=domains.EXACT):
    program = parse_program((MODELS / name).read_text())
    return build_model(program, BuildOptions(number_domain=domain, constants=constants or {}))


def exact():
    return CheckSettings(solver="exact-elimination", exact=True)


def chain(entries, labels, n, rewards=None):
    matrix = from_triplets(n, [(r, c, Fraction(v)) for r, c, v in entries], domain=domains.EXACT)
    model = Model(
        kind="dtmc",
        transitions=matrix,
        choices=ChoiceStructure.identity(n),
        labeling=Labeling(n, {k: frozenset(v) for k, v in labels.items()}),
        initial_states=(0,),
        rewards=rewards or {},
    )
    return model


def test_initial_partition_unlabeled_single_block():
    model = chain([(0, 1, 1), (1, 1, 1)], {}, 2)
    assert initial_partition(model).block_count == 1


def test_initial_partition_split_by_label():
    model = chain([(0, 1, 1), (1, 1, 1)], {"target": {1}}, 2)
    assert initial_partition(model).block_count == 2


def test_initial_partition_split_by_state_reward():
    from stormlet.models import RewardModel

    model = chain(
        [(0, 1, 1), (1, 1, 1)],
        {},
        2,
        rewards={"r": RewardModel(state_rewards=[Fraction(0), Fraction(1)])},
    )
    assert initial_partition(model).block_count == 2


def symmetric_branches():
    # 0 branches to 1 and 2 which both surely reach target 3
    entries = [
        (0, 1, Fraction(1, 2)),
        (0, 2, Fraction(1, 2)),
        (1, 3, 1),
        (2, 3, 1),
        (3, 3, 1),
    ]
    return chain(entries, {"target": {3}}, 4)


def test_symmetric_branches_merge():
    model = symmetric_branches()
    partition = refine(model, initial_partition(model))
    assert partition.block_of[1] == partition.block_of[2]
    assert partition.block_count == 3
    small = quotient(model, partition)
    assert small.state_count == 3
    assert small.transitions.row_sum(small.initial_states[0]) == 1


def test_refine_idempotent_on_minimal_chain():
    model = chain([(0, 1, 1), (1, 1, 1)], {"t": {1}}, 2)
    partition = refine(model, initial_partition(model))
    again = refine(model, partition)
    assert again.block_of == partition.block_of


def test_one_block_quotient_single_state():
    model = chain([(0, 0, 1)], {}, 1)
    partition = refine(model, initial_partition(model))
    small = quotient(model, partition)
    assert small.state_count == 1


def test_knuth_yao_quotient_smaller_and_value_preserved():
    model = build("die.pm")
    small = minimize(model, relevant_labels=["one", "done", "init"], relevant_rewards=[])
    assert small.state_count < 13
    original = check(model, parse_property('P=? [ F "one" ]'), exact())
    reduced = check(small, parse_property('P=? [ F "one" ]'), exact())
    assert original.value_at_initial == reduced.value_at_initial == Fraction(1, 6)


def test_herman3_quotient_preserves_stable_probability():
    model = build("herman3.pm")
    small = minimize(model)
    assert small.state_count <= model.state_count
    reduced = check(small, parse_property('P=? [ F "stable" ]'), exact())
    assert all(v == 1 for v in reduced.values)


@pytest.mark.parametrize(
    "name,constants,prop",
    [
        ("die.pm", None, 'P=? [ F "one" ]'),
        ("die.pm", None, 'R{"coin_flips"}=? [ F "done" ]'),
        ("brp.pm", {"N": 4, "MAX": 2}, 'P=? [ F "error" ]'),
        ("queue.pm", None, 'P=? [ !"empty" U "full" ]'),
    ],
)
def test_quotient_values_equal_original_exactly(name, constants, prop):
    model = build(name, constants)
    small = minimize(model)
    prop = parse_property(prop)
    original = check(model, prop, exact())
    reduced = check(small, prop, exact())
    assert original.value_at_initial == reduced.value_at_initial


@pytest.mark.parametrize(
    "name,prop",
    [
        ("mdp_coins.pm", 'Pmax=? [ F "done" ]'),
        ("mdp_coins.pm", 'Rmin{"time"}=? [ F "done" ]'),
        ("mdp_detour.pm", 'Pmin=? [ F "goal" ]'),
        ("ma_jobs.pm", 'Pmax=? [ F "done" ]'),
    ],
)
def test_quotient_preserves_nondeterministic_values(name, prop):
    model = build(name)
    small = minimize(model)
    prop = parse_property(prop)
    settings = CheckSettings(solver="policy-iteration", exact=True)
    assert check(model, prop, settings).value_at_initial == check(small, prop, settings).value_at_initial


def test_stable_blocks_have_identical_signatures():
    from stormlet.bisimulation import _state_signature

    for name in ("die.pm", "herman3.pm", "mdp_coins.pm"):
        model = build(name)
        partition = refine(model, initial_partition(model))
        names = sorted(model.rewards)
        for members in partition.blocks():
            signatures = {repr(_state_signature(model, partition, s, names)) for s in members}
            assert len(signatures) == 1


def test_block_count_never_increases_in_quotient():
    model = build("die.pm")
    partition = refine(model, initial_partition(model))
    small = quotient(model, partition)
    partition2 = refine(small, initial_partition(small))
    assert partition2.block_count == small.state_count  # already minimal
