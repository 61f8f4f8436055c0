"""Strong probabilistic bisimulation by signature refinement.

States start partitioned by label signature and state rewards; each
round regroups them by their transition signature (per-block summed
probability or rate, and for nondeterministic models the set of
per-choice block distributions including action labels and action
rewards).  The fixpoint is the coarsest strong bisimulation respecting
the initial partition, and the quotient model preserves every supported
property.  Hash-based refinement with a fixed iteration order keeps the
result deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import domains
from .errors import ModelError
from .models import MA, ChoiceStructure, Labeling, Model, RewardModel
from .sparse import from_triplets


@dataclass
class Partition:
    """Dense block ids per state."""

    block_of: list[int]
    block_count: int

    def blocks(self) -> list[list[int]]:
        members: list[list[int]] = [[] for _ in range(self.block_count)]
        for s, b in enumerate(self.block_of):
            members[b].append(s)
        return members


def initial_partition(model: Model, relevant_labels=None, relevant_rewards=None) -> Partition:
    """Group states by (label signature, state-reward values)."""
    labels = sorted(relevant_labels) if relevant_labels is not None else sorted(model.labeling.names())
    rewards = sorted(relevant_rewards) if relevant_rewards is not None else sorted(model.rewards)
    n = model.state_count
    signature_to_block: dict = {}
    block_of = []
    for s in range(n):
        bits = tuple(s in model.labeling.states_with(name) for name in labels)
        reward_values = tuple(
            _hashable(model.rewards[name].state_reward(s, model.domain)) for name in rewards
        )
        markov = s in model.markovian_states if model.kind == MA else None
        key = (bits, reward_values, markov)
        if key not in signature_to_block:
            signature_to_block[key] = len(signature_to_block)
        block_of.append(signature_to_block[key])
    return Partition(block_of, len(signature_to_block))


def _hashable(value):
    if isinstance(value, float):
        return value
    return value  # Fractions hash fine; rational functions are not supported here


def _state_signature(model: Model, partition: Partition, s: int, reward_names):
    """Transition signature of a state against the current partition."""
    matrix = model.transitions
    if model.deterministic:
        dist: dict[int, object] = {}
        for col, val in matrix.row(s):
            block = partition.block_of[col]
            dist[block] = dist.get(block, domains.zero(model.domain)) + val
        return tuple(sorted(dist.items()))
    choices = []
    for r in model.choices.rows_of(s):
        dist = {}
        for col, val in matrix.row(r):
            block = partition.block_of[col]
            dist[block] = dist.get(block, domains.zero(model.domain)) + val
        action = model.choices.action_of(r)
        action_rewards = tuple(
            _hashable(model.rewards[name].action_reward(r, model.domain)) for name in reward_names
        )
        choices.append((action, action_rewards, tuple(sorted(dist.items()))))
    return tuple(sorted(set(choices), key=repr))


def refine(model: Model, partition: Partition, relevant_rewards=None) -> Partition:
    """Signature refinement to the coarsest stable partition."""
    if model.domain == domains.PARAMETRIC:
        raise ModelError("bisimulation on parametric models is not supported")
    reward_names = sorted(relevant_rewards) if relevant_rewards is not None else sorted(model.rewards)
    n = model.state_count
    current = partition
    while True:
        key_to_block: dict = {}
        block_of = []
        for s in range(n):
            key = (current.block_of[s], _state_signature(model, current, s, reward_names))
            if key not in key_to_block:
                key_to_block[key] = len(key_to_block)
            block_of.append(key_to_block[key])
        new = Partition(block_of, len(key_to_block))
        if new.block_count == current.block_count:
            return new
        current = new


def quotient(model: Model, partition: Partition) -> Model:
    """One state per block; transition values summed over blocks.

    Well-defined by stability; on small models an assertion compares the
    signatures of two members per block.
    """
    n = model.state_count
    blocks = partition.blocks()
    reward_names = sorted(model.rewards)
    if n <= 200:
        for members in blocks:
            if len(members) >= 2:
                a, b = members[0], members[1]
                assert _state_signature(model, partition, a, reward_names) == _state_signature(
                    model, partition, b, reward_names
                ), "quotient of an unstable partition"

    representatives = [members[0] for members in blocks]
    matrix = model.transitions
    offsets = [0]
    actions = []
    triplets = []
    row_map = []
    new_row = 0
    for block, rep in enumerate(representatives):
        for r in model.choices.rows_of(rep):
            dist: dict[int, object] = {}
            for col, val in matrix.row(r):
                target = partition.block_of[col]
                dist[target] = dist.get(target, domains.zero(model.domain)) + val
            for target in sorted(dist):
                triplets.append((new_row, target, dist[target]))
            actions.append(model.choices.action_of(r))
            row_map.append(r)
            new_row += 1
        offsets.append(new_row)
    new_matrix = from_triplets(new_row, triplets, columns=len(blocks), domain=model.domain)
    choices = ChoiceStructure(offsets, actions if model.choices.action_labels is not None else None)

    labeling = Labeling(len(blocks))
    for name in model.labeling.names():
        states = model.labeling.states_with(name)
        labeling.add(name, {b for b, members in enumerate(blocks) if members[0] in states})
    initial_blocks = tuple(sorted({partition.block_of[s] for s in model.initial_states}))

    rewards = {}
    for name, rm in model.rewards.items():
        state_rewards = None
        if rm.state_rewards is not None:
            state_rewards = [rm.state_rewards[rep] for rep in representatives]
        action_rewards = None
        if rm.action_rewards is not None:
            action_rewards = [rm.action_rewards[r] for r in row_map]
        rewards[name] = RewardModel(state_rewards, action_rewards)

    exit_rates = None
    if model.exit_rates is not None:
        exit_rates = [model.exit_rates[rep] for rep in representatives]
    markovian = None
    if model.kind == MA and model.markovian_states is not None:
        markovian = frozenset(
            b for b, members in enumerate(blocks) if members[0] in model.markovian_states
        )

    return Model(
        kind=model.kind,
        transitions=new_matrix,
        choices=choices,
        labeling=labeling,
        initial_states=initial_blocks,
        rewards=rewards,
        exit_rates=exit_rates,
        markovian_states=markovian,
    )


def minimize(model: Model, relevant_labels=None, relevant_rewards=None) -> Model:
    """Initial partition, refinement, quotient in one call."""
    partition = refine(model, initial_partition(model, relevant_labels, relevant_rewards), relevant_rewards)
    return quotient(model, partition)


def property_relevant_minimize(model: Model, properties):
    """Quotient with respect to exactly what the properties mention.

    Expression atoms over state variables are evaluated on the full
    model and replaced by synthetic labels so they survive quotienting;
    only labels and reward structures the properties reference enter the
    initial partition, which maximizes the reduction.

    Returns (quotient, rewritten properties).
    """
    from dataclasses import replace as dc_replace

    from . import expressions as ex
    from .properties import (
        Eventually,
        Globally,
        LabelAtom,
        Next,
        Until,
        evaluate_state_formula,
    )

    relevant_labels: set[str] = set()
    relevant_rewards: set[str] = set()
    synthetic: dict[frozenset, str] = {}
    extra_labels: dict[str, frozenset] = {}

    def rewrite_sf(sf):
        if isinstance(sf, LabelAtom):
            relevant_labels.add(sf.name)
            return sf
        if isinstance(sf, ex.Lit) and isinstance(sf.value, bool):
            return sf
        if isinstance(sf, ex.Unary) and sf.op == "!":
            return ex.Unary("!", rewrite_sf(sf.operand))
        if isinstance(sf, ex.Binary) and sf.op in ("&", "|", "=>", "<=>"):
            return ex.Binary(sf.op, rewrite_sf(sf.left), rewrite_sf(sf.right))
        states = evaluate_state_formula(sf, model)
        if states not in synthetic:
            name = f"__atom{len(synthetic)}"
            synthetic[states] = name
            extra_labels[name] = states
        name = synthetic[states]
        relevant_labels.add(name)
        return LabelAtom(name)

    def rewrite_path(path):
        if isinstance(path, Next):
            return Next(rewrite_sf(path.target))
        if isinstance(path, Eventually):
            return Eventually(rewrite_sf(path.target), path.bound)
        if isinstance(path, Globally):
            return Globally(rewrite_sf(path.target), path.bound)
        if isinstance(path, Until):
            return Until(rewrite_sf(path.left), rewrite_sf(path.right), path.bound)
        raise ModelError(f"unknown path formula {path!r}")

    rewritten = []
    for prop in properties:
        if prop.operator == "R":
            if prop.reward_name is not None:
                relevant_rewards.add(prop.reward_name)
            elif len(model.rewards) == 1:
                relevant_rewards.add(next(iter(model.rewards)))
            else:
                relevant_rewards.update(model.rewards)
        rewritten.append(dc_replace(prop, path=rewrite_path(prop.path)))

    if extra_labels:
        labeling = Labeling(model.state_count)
        for name in model.labeling.names():
            labeling.add(name, model.labeling.states_with(name))
        for name, states in extra_labels.items():
            labeling.add(name, states)
        model = dc_replace(model, labeling=labeling)
    small = minimize(model, sorted(relevant_labels), sorted(relevant_rewards))
    return small, rewritten
