"""In-memory Markov models: DTMC, CTMC, MDP, and (untimed) MA.

A model bundles a sparse transition matrix, a choice structure mapping
states to matrix rows, labelings, reward structures, and (for
continuous-time kinds) exit rates.  All types are immutable after
construction and safe to share read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import domains
from .errors import ModelError
from .sparse import SparseMatrix, from_triplets

DTMC = "dtmc"
CTMC = "ctmc"
MDP = "mdp"
MA = "ma"

KINDS = (DTMC, CTMC, MDP, MA)

# |row sum - 1| tolerance for probability rows in the float domain
FLOAT_ROW_TOLERANCE = 1e-10


class Labeling:
    """Map from label name to the set of states carrying it."""

    def __init__(self, state_count: int, labels: dict[str, frozenset[int]] | None = None):
        self.state_count = state_count
        self._labels: dict[str, frozenset[int]] = {}
        for name, states in (labels or {}).items():
            self.add(name, states)

    def add(self, name: str, states) -> None:
        states = frozenset(int(s) for s in states)
        for s in states:
            if not 0 <= s < self.state_count:
                raise ModelError(f"label {name!r} marks out-of-range state {s}")
        self._labels[name] = states

    def names(self):
        return list(self._labels)

    def states_with(self, name: str) -> frozenset[int]:
        if name not in self._labels:
            raise ModelError(f"unknown label {name!r}")
        return self._labels[name]

    def has(self, name: str) -> bool:
        return name in self._labels

    def labels_of(self, state: int):
        return [name for name, states in self._labels.items() if state in states]

    def __eq__(self, other):
        return isinstance(other, Labeling) and self._labels == other._labels

    def __repr__(self):
        return f"Labeling({', '.join(f'{k}:{len(v)}' for k, v in self._labels.items())})"


@dataclass
class RewardModel:
    """Non-negative state rewards and/or per-matrix-row action rewards."""

    state_rewards: list | None = None
    action_rewards: list | None = None

    def state_reward(self, state: int, domain: str):
        if self.state_rewards is None:
            return domains.zero(domain)
        return self.state_rewards[state]

    def action_reward(self, row: int, domain: str):
        if self.action_rewards is None:
            return domains.zero(domain)
        return self.action_rewards[row]


class ChoiceStructure:
    """Maps each state to its contiguous block of matrix rows.

    ``state_offsets`` has length ``|S| + 1``; state ``s`` owns rows
    ``state_offsets[s] .. state_offsets[s+1]``.  ``action_labels`` is an
    optional per-row action name (None for silent rows).
    """

    __slots__ = ("state_offsets", "action_labels")

    def __init__(self, state_offsets, action_labels=None):
        self.state_offsets = np.asarray(state_offsets, dtype=np.int64)
        self.action_labels = list(action_labels) if action_labels is not None else None

    @staticmethod
    def identity(state_count: int) -> "ChoiceStructure":
        return ChoiceStructure(np.arange(state_count + 1, dtype=np.int64))

    @property
    def state_count(self) -> int:
        return len(self.state_offsets) - 1

    @property
    def row_count(self) -> int:
        return int(self.state_offsets[-1])

    def rows_of(self, state: int) -> range:
        return range(int(self.state_offsets[state]), int(self.state_offsets[state + 1]))

    def choice_count(self, state: int) -> int:
        return int(self.state_offsets[state + 1] - self.state_offsets[state])

    def state_of_row(self, row: int) -> int:
        return int(np.searchsorted(self.state_offsets, row, side="right") - 1)

    def action_of(self, row: int):
        if self.action_labels is None:
            return None
        return self.action_labels[row]


@dataclass
class Model:
    """Tagged union over the four model kinds.

    For DTMC/CTMC the choice structure is the identity (one row per
    state).  ``exit_rates`` is present for CTMC (row sums) and for the
    Markovian states of an MA.  ``state_valuations``, when present, maps
    each state back to the variable assignment that produced it so
    property atoms over variables can be evaluated.
    """

    kind: str
    transitions: SparseMatrix
    choices: ChoiceStructure
    labeling: Labeling
    initial_states: tuple[int, ...]
    rewards: dict[str, RewardModel] = field(default_factory=dict)
    exit_rates: list | None = None
    markovian_states: frozenset[int] | None = None
    state_valuations: list | None = None
    variable_names: tuple[str, ...] | None = None

    @property
    def state_count(self) -> int:
        return self.choices.state_count

    @property
    def transition_count(self) -> int:
        return self.transitions.n_entries

    @property
    def domain(self) -> str:
        return self.transitions.domain

    @property
    def deterministic(self) -> bool:
        return self.kind in (DTMC, CTMC)

    def reward_model(self, name: str | None) -> RewardModel:
        if name is None:
            if len(self.rewards) == 1:
                return next(iter(self.rewards.values()))
            if not self.rewards:
                raise ModelError("model has no reward structure")
            raise ModelError(
                "model has several reward structures; name one of: "
                + ", ".join(sorted(self.rewards))
            )
        if name not in self.rewards:
            raise ModelError(f"unknown reward structure {name!r}")
        return self.rewards[name]

    def valuation_env(self, state: int) -> dict:
        if self.state_valuations is None or self.variable_names is None:
            raise ModelError("model carries no state valuations")
        return dict(zip(self.variable_names, self.state_valuations[state]))


@dataclass
class Violation:
    """First violated invariant found by :func:`validate`."""

    invariant: str
    state: int | None = None
    row: int | None = None

    def __str__(self):
        where = ""
        if self.state is not None:
            where += f" at state {self.state}"
        if self.row is not None:
            where += f" (row {self.row})"
        return self.invariant + where


def _sum_is_one(total, domain: str) -> bool:
    if domain == domains.FLOAT:
        return abs(total - 1.0) <= FLOAT_ROW_TOLERANCE
    return total == 1


def _nonnegative(value, domain: str) -> bool:
    if domain == domains.PARAMETRIC:
        # sign of a rational function is point-dependent; checked at instantiation
        return True
    return value >= 0


def validate(model: Model) -> Violation | None:
    """Check every model invariant; return the first violation or None."""
    matrix = model.transitions
    domain = model.domain
    offsets = matrix.row_offsets
    if offsets[0] != 0 or offsets[-1] != matrix.n_entries:
        return Violation("row offsets do not cover the value array")
    if any(offsets[i] > offsets[i + 1] for i in range(matrix.row_count)):
        return Violation("row offsets not nondecreasing")
    for r in range(matrix.row_count):
        last = -1
        for col, val in matrix.row(r):
            if col <= last:
                return Violation("columns not strictly ascending", row=r)
            if col >= matrix.column_count:
                return Violation("column index out of bounds", row=r)
            last = col
            if domains.is_zero(val):
                return Violation("stored zero value", row=r)

    if model.choices.row_count != matrix.row_count:
        return Violation("choice structure does not cover all matrix rows")
    for s in range(model.state_count):
        if model.choices.choice_count(s) < 1:
            return Violation("state owns no matrix row", state=s)

    if not model.initial_states:
        return Violation("empty initial state set")

    for name in model.labeling.names():
        for s in model.labeling.states_with(name):
            if s >= model.state_count:
                return Violation(f"label {name!r} out of state range", state=s)

    for s in range(model.state_count):
        for r in model.choices.rows_of(s):
            rate_row = model.kind == CTMC or (
                model.kind == MA and model.markovian_states is not None and s in model.markovian_states
            )
            total = matrix.row_sum(r)
            if rate_row:
                for _, val in matrix.row(r):
                    if not _nonnegative(val, domain):
                        return Violation("negative rate", state=s, row=r)
                expected = model.exit_rates[s] if model.exit_rates is not None else None
                if expected is not None and total != expected:
                    if domain != domains.FLOAT or abs(total - expected) > FLOAT_ROW_TOLERANCE:
                        return Violation("exit rate differs from row sum", state=s, row=r)
                if matrix.row_entries(r) > 0:
                    positive = total > 0 if domain != domains.PARAMETRIC else not domains.is_zero(total)
                    if not positive:
                        return Violation("non-positive exit rate on non-absorbing state", state=s, row=r)
            else:
                if domain != domains.PARAMETRIC:
                    for _, val in matrix.row(r):
                        if not (0 <= val <= 1):
                            return Violation("probability outside [0, 1]", state=s, row=r)
                if matrix.row_entries(r) == 0:
                    return Violation("empty probability row", state=s, row=r)
                if domain != domains.PARAMETRIC and not _sum_is_one(total, domain):
                    return Violation("row sum != 1", state=s, row=r)

    for name, rm in model.rewards.items():
        for vec, what in ((rm.state_rewards, "state"), (rm.action_rewards, "action")):
            if vec is None:
                continue
            for i, val in enumerate(vec):
                if not _nonnegative(val, domain):
                    return Violation(f"negative {what} reward in {name!r}", state=i if what == "state" else None, row=i if what == "action" else None)
    return None


def embedded_dtmc(ctmc: Model) -> Model:
    """Embedded jump chain of a CTMC: rows divided by their exit rates.

    Absorbing (empty) rows become probability-1 self-loops.  Labels and
    rewards are carried over unchanged; no reward rescaling for sojourn
    times is performed.
    """
    if ctmc.kind != CTMC:
        raise ModelError(f"embedded_dtmc expects a CTMC, got {ctmc.kind}")
    matrix = ctmc.transitions
    one = domains.one(ctmc.domain)
    triplets = []
    for s in range(matrix.row_count):
        rate = matrix.row_sum(s)
        if matrix.row_entries(s) == 0:
            triplets.append((s, s, one))
            continue
        for col, val in matrix.row(s):
            triplets.append((s, col, val / rate))
    new_matrix = from_triplets(matrix.row_count, triplets, columns=matrix.column_count, domain=ctmc.domain)
    return Model(
        kind=DTMC,
        transitions=new_matrix,
        choices=ChoiceStructure.identity(ctmc.state_count),
        labeling=ctmc.labeling,
        initial_states=ctmc.initial_states,
        rewards=ctmc.rewards,
        state_valuations=ctmc.state_valuations,
        variable_names=ctmc.variable_names,
    )


def uniformize(ctmc: Model, rate) -> Model:
    """Uniformized DTMC of a CTMC at uniformization rate ``rate``.

    ``P[s,s'] = R[s,s']/rate`` for ``s' != s`` and the self-loop absorbs
    the remaining mass ``1 - exit_rate[s]/rate``; requires ``rate`` at
    least the maximum exit rate.
    """
    if ctmc.kind != CTMC:
        raise ModelError(f"uniformize expects a CTMC, got {ctmc.kind}")
    matrix = ctmc.transitions
    max_exit = max((matrix.row_sum(s) for s in range(matrix.row_count)), default=0)
    if rate < max_exit:
        raise ModelError(f"uniformization rate {rate} below maximal exit rate {max_exit}")
    one = domains.one(ctmc.domain)
    triplets = []
    for s in range(matrix.row_count):
        exit_rate = matrix.row_sum(s)
        self_mass = one - exit_rate / rate
        for col, val in matrix.row(s):
            if col == s:
                self_mass = self_mass + val / rate
            else:
                triplets.append((s, col, val / rate))
        triplets.append((s, s, self_mass))
    new_matrix = from_triplets(matrix.row_count, triplets, columns=matrix.column_count, domain=ctmc.domain)
    return Model(
        kind=DTMC,
        transitions=new_matrix,
        choices=ChoiceStructure.identity(ctmc.state_count),
        labeling=ctmc.labeling,
        initial_states=ctmc.initial_states,
        rewards=ctmc.rewards,
        state_valuations=ctmc.state_valuations,
        variable_names=ctmc.variable_names,
    )


def induced_untimed_mdp(ma: Model) -> Model:
    """Untimed MDP of an MA: Markovian rows embedded, probabilistic kept.

    Unbounded reachability and reachability-reward values are preserved;
    timing information is discarded.
    """
    if ma.kind != MA:
        raise ModelError(f"induced_untimed_mdp expects an MA, got {ma.kind}")
    matrix = ma.transitions
    markovian = ma.markovian_states or frozenset()
    one = domains.one(ma.domain)
    triplets = []
    offsets = [0]
    actions = []
    row_map = []  # new row -> old row (for reward transfer)
    new_row = 0
    for s in range(ma.state_count):
        for r in ma.choices.rows_of(s):
            if s in markovian:
                rate = matrix.row_sum(r)
                if matrix.row_entries(r) == 0:
                    triplets.append((new_row, s, one))
                else:
                    for col, val in matrix.row(r):
                        triplets.append((new_row, col, val / rate))
            else:
                for col, val in matrix.row(r):
                    triplets.append((new_row, col, val))
            actions.append(ma.choices.action_of(r))
            row_map.append(r)
            new_row += 1
        offsets.append(new_row)
    new_matrix = from_triplets(new_row, triplets, columns=matrix.column_count, domain=ma.domain)
    rewards = {}
    for name, rm in ma.rewards.items():
        action_rewards = None
        if rm.action_rewards is not None:
            action_rewards = [rm.action_rewards[old] for old in row_map]
        rewards[name] = RewardModel(rm.state_rewards, action_rewards)
    return Model(
        kind=MDP,
        transitions=new_matrix,
        choices=ChoiceStructure(offsets, actions),
        labeling=ma.labeling,
        initial_states=ma.initial_states,
        rewards=rewards,
        state_valuations=ma.state_valuations,
        variable_names=ma.variable_names,
    )
