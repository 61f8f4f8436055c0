"""Explicit transition/label/reward text formats.

``.tra``: first non-comment line is the kind keyword (``dtmc``, ``ctmc``
or ``mdp``).  DTMC/CTMC lines read ``src dst value``; MDP lines read
``src choice dst prob`` with choices numbered from 0 per state.  Fields
are separated by single spaces; ``#`` begins a comment.

``.lab``: a ``#DECLARATION`` / ``#END`` header listing label names, then
lines ``state label [label ...]``.

``.rew``: state rewards, lines ``state value``.

The state count is one plus the largest index mentioned anywhere.
Numeric values parse to exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import domains
from .errors import ParseError
from .models import CTMC, DTMC, MDP, ChoiceStructure, Labeling, Model, RewardModel
from .sparse import from_triplets

EXPLICIT_KINDS = (DTMC, CTMC, MDP)


@dataclass
class ExplicitTables:
    """Raw tables parsed from the explicit format."""

    kind: str
    state_count: int
    # deterministic: (src, dst, value); mdp: (src, choice, dst, prob)
    transitions: list = field(default_factory=list)
    labels: dict = field(default_factory=dict)  # name -> set of states
    state_rewards: dict = field(default_factory=dict)  # state -> value


def _content_lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        yield number, line


def _fields(line: str, number: int):
    parts = line.split(" ")
    if any(p == "" for p in parts):
        raise ParseError(f"malformed line (fields must be single-space separated): {line!r}", number)
    return parts


def _rational(text: str, number: int, line: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"malformed number {text!r} in line: {line!r}", number) from exc


def _state_index(text: str, number: int, line: str) -> int:
    if not text.isdigit():
        raise ParseError(f"malformed state index {text!r} in line: {line!r}", number)
    return int(text)


def parse_explicit(tra_text: str, lab_text: str, rew_text: str | None = None) -> ExplicitTables:
    """Parse the three explicit files into raw tables."""
    lines = _content_lines(tra_text)
    try:
        number, kind_line = next(lines)
    except StopIteration:
        raise ParseError("empty .tra input", 1) from None
    kind = kind_line.strip()
    if kind not in EXPLICIT_KINDS:
        raise ParseError(f"unknown model kind {kind!r}", number, expected=EXPLICIT_KINDS)

    max_state = -1
    transitions = []
    for number, line in lines:
        parts = _fields(line, number)
        if kind == MDP:
            if len(parts) != 4:
                raise ParseError(f"malformed line (want 'src choice dst prob'): {line!r}", number)
            src = _state_index(parts[0], number, line)
            choice = _state_index(parts[1], number, line)
            dst = _state_index(parts[2], number, line)
            value = _rational(parts[3], number, line)
            if not 0 <= value <= 1:
                raise ParseError(f"probability {value} outside [0,1] in line: {line!r}", number)
            transitions.append((src, choice, dst, value))
        else:
            if len(parts) != 3:
                raise ParseError(f"malformed line (want 'src dst value'): {line!r}", number)
            src = _state_index(parts[0], number, line)
            dst = _state_index(parts[1], number, line)
            value = _rational(parts[2], number, line)
            if kind == DTMC and not 0 <= value <= 1:
                raise ParseError(f"probability {value} outside [0,1] in line: {line!r}", number)
            transitions.append((src, dst, value))
        max_state = max(max_state, src, dst)

    declared: list[str] = []
    labels: dict[str, set] = {}
    lab_lines = _content_lines(lab_text)
    header = False
    body: list[tuple[int, str]] = []
    for number, raw in enumerate(lab_text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "#DECLARATION":
            header = True
            continue
        if line == "#END":
            header = False
            continue
        if header:
            for name in line.split():
                if name in declared:
                    raise ParseError(f"label {name!r} declared twice", number)
                declared.append(name)
            continue
        content = line.split("#", 1)[0].strip()
        if content:
            body.append((number, content))
    for name in declared:
        labels[name] = set()
    for number, line in body:
        parts = _fields(line, number)
        state = _state_index(parts[0], number, line)
        if len(parts) < 2:
            raise ParseError(f"malformed line (want 'state label [label ...]'): {line!r}", number)
        for name in parts[1:]:
            if name not in labels:
                raise ParseError(f"undeclared label {name!r} used in line: {line!r}", number)
            labels[name].add(state)
        max_state = max(max_state, state)

    state_rewards: dict[int, Fraction] = {}
    if rew_text is not None:
        for number, line in _content_lines(rew_text):
            parts = _fields(line, number)
            if len(parts) != 2:
                raise ParseError(f"malformed line (want 'state value'): {line!r}", number)
            state = _state_index(parts[0], number, line)
            value = _rational(parts[1], number, line)
            state_rewards[state] = value
            max_state = max(max_state, state)

    return ExplicitTables(
        kind=kind,
        state_count=max_state + 1,
        transitions=transitions,
        labels=labels,
        state_rewards=state_rewards,
    )


def model_from_tables(tables: ExplicitTables, domain: str = domains.FLOAT, fix_deadlocks: bool = False) -> Model:
    """Assemble a validated model from raw explicit tables.

    Initial states come from the ``init`` label.  Deadlock states (no
    outgoing row) error out unless ``fix_deadlocks`` adds a self-loop
    and the reserved ``deadlock`` label.
    """
    from .errors import BuildError

    n = tables.state_count
    deadlocks = set()
    if tables.kind == MDP:
        per_state: list[dict[int, list]] = [dict() for _ in range(n)]
        for src, choice, dst, value in tables.transitions:
            per_state[src].setdefault(choice, []).append((dst, value))
        offsets = [0]
        triplets = []
        row = 0
        for s in range(n):
            choice_ids = sorted(per_state[s])
            if choice_ids and choice_ids != list(range(len(choice_ids))):
                raise BuildError(f"state {s}: choices must be numbered 0..{len(choice_ids) - 1}")
            if not choice_ids:
                deadlocks.add(s)
                if not fix_deadlocks:
                    raise BuildError(f"deadlock at state {s} (use fix_deadlocks to add a self-loop)")
                triplets.append((row, s, Fraction(1)))
                row += 1
            for c in choice_ids:
                for dst, value in per_state[s][c]:
                    triplets.append((row, dst, value))
                row += 1
            offsets.append(row)
        matrix = from_triplets(row, [(r, c, domains.convert(v, domain)) for r, c, v in triplets], columns=n, domain=domain)
        choices = ChoiceStructure(offsets)
    else:
        per_state = [dict() for _ in range(n)]
        for src, dst, value in tables.transitions:
            per_state[src][dst] = per_state[src].get(dst, Fraction(0)) + value
        triplets = []
        for s in range(n):
            if not per_state[s] and tables.kind == DTMC:
                deadlocks.add(s)
                if not fix_deadlocks:
                    raise BuildError(f"deadlock at state {s} (use fix_deadlocks to add a self-loop)")
                per_state[s] = {s: Fraction(1)}
            for dst, value in per_state[s].items():
                triplets.append((s, dst, domains.convert(value, domain)))
        matrix = from_triplets(n, triplets, columns=n, domain=domain)
        choices = ChoiceStructure.identity(n)

    labeling = Labeling(n)
    for name, states in tables.labels.items():
        labeling.add(name, states)
    if not labeling.has("init") or not labeling.states_with("init"):
        raise BuildError("explicit model must mark at least one state with the 'init' label")
    labeling.add("deadlock", deadlocks)
    initial = tuple(sorted(labeling.states_with("init")))

    rewards = {}
    if tables.state_rewards:
        vec = [domains.convert(tables.state_rewards.get(s, Fraction(0)), domain) for s in range(n)]
        rewards["reward"] = RewardModel(state_rewards=vec)

    exit_rates = None
    if tables.kind == CTMC:
        exit_rates = [matrix.row_sum(s) for s in range(n)]

    model = Model(
        kind=tables.kind,
        transitions=matrix,
        choices=choices,
        labeling=labeling,
        initial_states=initial,
        rewards=rewards,
        exit_rates=exit_rates,
    )
    from .models import validate

    violation = validate(model)
    if violation is not None:
        raise BuildError(f"explicit model invalid: {violation}")
    return model
