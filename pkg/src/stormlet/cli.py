"""Command-line entry point.

Builds the model once, checks every property in order, and prints one
result block per property.  Exact values print as fractions, floats with
six significant digits.  Exit codes: 0 ok, 1 parse/build error,
2 unsupported property, 3 timeout.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
from fractions import Fraction

from . import domains
from .bisimulation import property_relevant_minimize
from .builder import BuildOptions, build_model
from .checker import CheckSettings, check
from .errors import (
    BuildError,
    CheckError,
    CheckTimeout,
    EvaluationError,
    ModelError,
    ParseError,
    SolverError,
    StormletError,
    UnsupportedFeatureError,
)
from .explicit_format import model_from_tables, parse_explicit
from .parametric import instantiate, parse_point, parse_region, region_lifting, solution_function
from .prism import parse_constant_bindings, parse_program
from .properties import parse_properties, pretty_property
from .ratfunc import RationalFunction
from .solvers import DEFAULT_MAX_ITER

_EQSOLVER_MAP = {
    "vi": "vi",
    "ii": "ii",
    "ovi": "ovi",
    "exact": "exact-elimination",
    "elimination": "elimination",
    "pi": "policy-iteration",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stormlet",
        description="Explicit-state probabilistic model checker for a PRISM-language subset.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--prism", metavar="FILE", help="PRISM model file")
    source.add_argument(
        "--explicit", nargs=2, metavar=("TRA", "LAB"), help="explicit transition and label files"
    )
    parser.add_argument("--staterew", metavar="REW", help="explicit state-reward file")
    parser.add_argument(
        "--prop", required=True, metavar="TEXT|FILE", help="property string or .props file"
    )
    parser.add_argument("--constants", default="", metavar="N=3,p=0.1", help="constant bindings")
    parser.add_argument("--eqsolver", choices=sorted(_EQSOLVER_MAP), default=None)
    parser.add_argument("--sound", action="store_true", help="sound checking (alias for --eqsolver ii)")
    parser.add_argument("--exact", action="store_true", help="exact rational checking")
    parser.add_argument("--precision", default="1e-6", help="solver precision epsilon")
    parser.add_argument("--absolute", action="store_true", help="absolute instead of relative precision")
    parser.add_argument("--bisim", action="store_true", help="check on the bisimulation quotient")
    parser.add_argument("--parametric", action="store_true", help="parametric analysis mode")
    parser.add_argument("--point", default=None, metavar="p=1/2,q=1/3")
    parser.add_argument("--region", default=None, metavar='"0.3<=p<=0.6"')
    parser.add_argument("--timeout", type=float, default=None, metavar="SECONDS")
    parser.add_argument("--fix-deadlocks", action="store_true")
    parser.add_argument("--engine", default="sparse", help="only the sparse engine exists")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def _settings_from_args(args) -> CheckSettings:
    solver = _EQSOLVER_MAP[args.eqsolver] if args.eqsolver else "vi"
    if args.sound and solver == "vi":
        solver = "ii"
    if args.exact and solver not in ("exact-elimination", "elimination", "policy-iteration"):
        solver = "exact-elimination"
    try:
        precision = Fraction(args.precision)
    except (ValueError, ZeroDivisionError):
        precision = Fraction(str(float(args.precision)))
    max_iter = DEFAULT_MAX_ITER
    env_cap = os.environ.get("STORMLET_MAX_ITER")
    if env_cap:
        max_iter = int(env_cap)
    return CheckSettings(
        solver=solver,
        precision=precision,
        relative=not args.absolute,
        exact=args.exact,
        max_iterations=max_iter,
    )


def format_value(value, domain: str) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is domains.INF:
        return "inf"
    if isinstance(value, RationalFunction):
        return str(value)
    if isinstance(value, Fraction):
        return str(value)
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        return "inf" if value > 0 else str(value)
    return f"{value:.6g}"


def _json_value(value):
    if isinstance(value, bool):
        return value
    if value is domains.INF:
        return "inf"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, RationalFunction):
        return str(value)
    value = float(value)
    if value in (float("inf"), float("-inf")):
        return "inf"
    return value


def _load_properties(args):
    text = args.prop
    if os.path.exists(text):
        text = open(text, encoding="utf-8").read()
    props = parse_properties(text)
    if not props:
        raise CheckError("no property given")
    return props


def _build_from_args(args, domain):
    options_constants = parse_constant_bindings(args.constants)
    if args.prism:
        program = parse_program(open(args.prism, encoding="utf-8").read())
        return build_model(
            program,
            BuildOptions(
                fix_deadlocks=args.fix_deadlocks,
                number_domain=domain,
                constants=options_constants,
            ),
        )
    tra, lab = args.explicit
    rew = open(args.staterew, encoding="utf-8").read() if args.staterew else None
    tables = parse_explicit(
        open(tra, encoding="utf-8").read(), open(lab, encoding="utf-8").read(), rew
    )
    return model_from_tables(tables, domain=domain, fix_deadlocks=args.fix_deadlocks)


class _Timeout:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        if self.seconds:
            def handler(signum, frame):
                raise CheckTimeout(f"property timed out after {self.seconds}s")

            self._old = signal.signal(signal.SIGALRM, handler)
            signal.setitimer(signal.ITIMER_REAL, self.seconds)
        return self

    def __exit__(self, *exc):
        if self.seconds:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, self._old)
        return False


def _check_parametric(model, prop, args, lines, record):
    from . import expressions as ex
    from . import properties as props

    normalized = props.desugar(prop)
    if normalized.operator != "P" or normalized.bound is not None or normalized.complement:
        raise UnsupportedFeatureError("parametric mode supports P=? [ F target ] queries only")
    path = normalized.path
    if not isinstance(path, props.Until) or path.bound is not None:
        raise UnsupportedFeatureError("parametric mode supports unbounded reachability only")
    if not (isinstance(path.left, ex.Lit) and path.left.value is True):
        raise UnsupportedFeatureError("parametric mode supports F (not constrained until)")
    target = props.evaluate_state_formula(path.right, model)
    function = solution_function(model, target)
    lines.append(f"Result (for initial states): {function}")
    record["value"] = str(function)
    record["type"] = "parametric"
    if args.point:
        point = parse_point(args.point)
        value = function.evaluate(point)
        instantiate(model, point)  # validates well-definedness of the point
        lines.append(f"Result at point ({args.point}): {value}")
        record["at_point"] = {"point": args.point, "value": str(value)}
    if args.region:
        region = parse_region(args.region)
        lower, upper = region_lifting(model, region, target)
        lines.append(f"Region {args.region} bounds: [{lower}, {upper}]")
        record["region"] = {"region": args.region, "lower": str(lower), "upper": str(upper)}


def run(argv, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.engine != "sparse":
        print(f"error: unknown engine {args.engine!r} (only 'sparse' exists)", file=sys.stderr)
        return 1

    if args.parametric:
        domain = domains.PARAMETRIC
    elif args.exact:
        domain = domains.EXACT
    else:
        domain = domains.FLOAT

    report: dict = {}
    lines: list[str] = []
    try:
        properties = _load_properties(args)
        settings = None if args.parametric else _settings_from_args(args)
        model = _build_from_args(args, domain)
        if args.bisim:
            original_states = model.state_count
            model, properties = property_relevant_minimize(model, properties)
            lines.append(
                f"Bisimulation quotient: {model.state_count} states (from {original_states})"
            )
        lines.append(
            f"Model: {model.kind}, {model.state_count} states, {model.transition_count} transitions"
        )
        report["model"] = {
            "kind": model.kind,
            "states": model.state_count,
            "transitions": model.transition_count,
            "choices": model.transitions.row_count,
        }
        report["results"] = []
        for prop in properties:
            shown = prop.name if prop.name is not None else pretty_property(prop, with_name=False)
            lines.append(f'Model checking property "{shown}" ...')
            record = {
                "property": pretty_property(prop, with_name=False),
                "name": prop.name,
            }
            with _Timeout(args.timeout):
                if args.parametric:
                    _check_parametric(model, prop, args, lines, record)
                else:
                    result = check(model, prop, settings)
                    value = result.value_at_initial
                    lines.append(f"Result (for initial states): {format_value(value, model.domain)}")
                    record["value"] = _json_value(value)
                    record["type"] = (
                        "boolean"
                        if isinstance(value, bool)
                        else ("reward" if prop.operator == "R" else "probability")
                    )
            report["results"].append(record)
    except CheckTimeout as err:
        _emit(args, lines, report, out)
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (UnsupportedFeatureError, CheckError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ParseError, BuildError, EvaluationError, ModelError, SolverError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except StormletError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    _emit(args, lines, report, out)
    return 0


def _emit(args, lines, report, out):
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True), file=out)
    else:
        for line in lines:
            print(line, file=out)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
