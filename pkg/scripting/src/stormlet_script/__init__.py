"""Four-call scripting workflow over the stormlet checker.

    import stormlet_script as sp

    program = sp.parse_prism_program("die.pm")
    props = sp.parse_properties('P=? [ F "one" ]', program)
    model = sp.build_model(program, props)
    result = sp.model_checking(model, props[0])
    result.at(model.initial_states[0])

The layer forwards to the stormlet library and never computes anything
itself; handles hold references to the underlying immutable objects (no
matrix copies).  Solver and precision options are keyword arguments with
the CLI-equivalent names.
"""

from __future__ import annotations

from fractions import Fraction

import stormlet
from stormlet import CheckSettings, domains

__all__ = [
    "CheckSettings",
    "Model",
    "Program",
    "Property",
    "Result",
    "build_model",
    "model_checking",
    "parse_prism_program",
    "parse_properties",
]

_EQSOLVER_MAP = {
    "vi": "vi",
    "ii": "ii",
    "ovi": "ovi",
    "exact": "exact-elimination",
    "elimination": "elimination",
    "pi": "policy-iteration",
}


class Program:
    """Handle around a parsed PRISM program."""

    def __init__(self, inner):
        self._inner = inner

    @property
    def model_kind(self) -> str:
        return self._inner.model_kind

    def __repr__(self):
        return f"Program({self.model_kind}, {len(self._inner.modules)} modules)"


class Property:
    """Handle around a parsed property."""

    def __init__(self, inner):
        self._inner = inner

    @property
    def name(self):
        return self._inner.name

    def __str__(self):
        return stormlet.pretty_property(self._inner, with_name=False)

    def __repr__(self):
        return f"Property({self})"


class Model:
    """Handle around a built model; exposes the initial states."""

    def __init__(self, inner):
        self._inner = inner

    @property
    def initial_states(self) -> tuple:
        return self._inner.initial_states

    @property
    def nr_states(self) -> int:
        return self._inner.state_count

    @property
    def nr_transitions(self) -> int:
        return self._inner.transition_count

    @property
    def model_kind(self) -> str:
        return self._inner.kind

    def __repr__(self):
        return f"Model({self.model_kind}, {self.nr_states} states)"


class Result:
    """Handle around a check result, indexable by state."""

    def __init__(self, inner):
        self._inner = inner

    def at(self, state: int):
        return self._inner.at(state)

    @property
    def initial_states(self) -> tuple:
        return self._inner.initial_states

    @property
    def value_at_initial(self):
        return self._inner.value_at_initial

    def __repr__(self):
        return f"Result(at_initial={self.value_at_initial})"


def parse_prism_program(path: str) -> Program:
    """Parse a PRISM file into a program handle."""
    with open(path, encoding="utf-8") as handle:
        return Program(stormlet.parse_program(handle.read()))


def parse_properties(text: str, program: Program | None = None) -> list[Property]:
    """Parse one or more properties (the program argument is kept for context)."""
    del program  # accepted for workflow parity; parsing needs no program
    return [Property(p) for p in stormlet.parse_properties(text)]


def build_model(
    program: Program,
    properties: list[Property] | None = None,
    constants: dict | str | None = None,
    exact: bool = False,
    parametric: bool = False,
    fix_deadlocks: bool = False,
) -> Model:
    """Build the sparse model of a program.

    ``properties`` is accepted for workflow parity and not needed for
    construction.  ``constants`` takes a dict or a CLI-style binding
    string like ``"N=16,MAX=2"``.
    """
    del properties
    if isinstance(constants, str):
        constants = stormlet.parse_constant_bindings(constants)
    if parametric:
        domain = domains.PARAMETRIC
    elif exact:
        domain = domains.EXACT
    else:
        domain = domains.FLOAT
    options = stormlet.BuildOptions(
        fix_deadlocks=fix_deadlocks, number_domain=domain, constants=constants or {}
    )
    return Model(stormlet.build_model(program._inner, options))


def model_checking(
    model: Model,
    prop: Property,
    eqsolver: str | None = None,
    precision="1e-6",
    absolute: bool = False,
    sound: bool = False,
    exact: bool = False,
) -> Result:
    """Check one property; errors carry the underlying library messages."""
    solver = _EQSOLVER_MAP[eqsolver] if eqsolver else "vi"
    if sound and solver == "vi":
        solver = "ii"
    if exact and solver not in ("exact-elimination", "elimination", "policy-iteration"):
        solver = "exact-elimination"
    settings = CheckSettings(
        solver=solver,
        precision=Fraction(precision),
        relative=not absolute,
        exact=exact,
    )
    return Result(stormlet.check(model._inner, prop._inner, settings))
