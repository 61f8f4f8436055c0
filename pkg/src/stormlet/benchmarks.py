"""Registry of the bundled benchmark models and their checked properties.

Property entries carry a ``float_only`` flag for queries the exact
domain cannot serve (time-bounded CTMC analysis involves exponentials).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import domains
from .builder import BuildOptions, build_model
from .explicit_format import model_from_tables, parse_explicit
from .prism import parse_program

MODELS_DIR = Path(__file__).resolve().parent / "models"


def bundled_path(name: str) -> Path:
    return MODELS_DIR / name


@dataclass(frozen=True)
class BenchmarkProperty:
    text: str
    float_only: bool = False


@dataclass(frozen=True)
class Benchmark:
    name: str
    source: str  # "prism" | "explicit"
    files: tuple
    properties: tuple
    constants: dict = field(default_factory=dict, hash=False)
    fix_deadlocks: bool = False

    def load(self, domain: str = domains.FLOAT):
        if self.source == "prism":
            program = parse_program(bundled_path(self.files[0]).read_text())
            return build_model(
                program,
                BuildOptions(
                    number_domain=domain, constants=dict(self.constants), fix_deadlocks=self.fix_deadlocks
                ),
            )
        tra = bundled_path(self.files[0]).read_text()
        lab = bundled_path(self.files[1]).read_text()
        rew = bundled_path(self.files[2]).read_text() if len(self.files) > 2 else None
        return model_from_tables(
            parse_explicit(tra, lab, rew), domain=domain, fix_deadlocks=self.fix_deadlocks
        )


def P(text: str, float_only: bool = False) -> BenchmarkProperty:
    return BenchmarkProperty(text, float_only)


BENCHMARKS: tuple[Benchmark, ...] = (
    Benchmark(
        "die",
        "prism",
        ("die.pm",),
        (
            P('P=? [ F "one" ]'),
            P('P=? [ F "six" ]'),
            P('P=? [ F<=3 "one" ]'),
            P('R{"coin_flips"}=? [ F "done" ]'),
        ),
    ),
    Benchmark(
        "herman3",
        "prism",
        ("herman3.pm",),
        (
            P('P=? [ F "stable" ]'),
            P('R{"steps"}=? [ F "stable" ]'),
        ),
    ),
    Benchmark(
        "brp",
        "prism",
        ("brp.pm",),
        (
            P('P=? [ F "error" ]'),
            P('P=? [ F "success" ]'),
            P('R{"retransmissions"}=? [ F "finished" ]'),
        ),
        constants={"N": 16, "MAX": 2},
    ),
    Benchmark(
        "queue",
        "prism",
        ("queue.pm",),
        (
            P('P=? [ !"empty" U "full" ]'),
            P('R{"busy_jumps"}=? [ F "empty" ]'),
            P('P=? [ F<=1 "full" ]', float_only=True),
        ),
    ),
    Benchmark(
        "exp_line",
        "prism",
        ("exp_line.pm",),
        (
            P('P=? [ F<=1 "one_step" ]', float_only=True),
            P('P=? [ F<=1 "two_steps" ]', float_only=True),
        ),
    ),
    Benchmark(
        "mdp_coins",
        "prism",
        ("mdp_coins.pm",),
        (
            P('Pmax=? [ F "done" ]'),
            P('Pmin=? [ F<=1 "done" ]'),
            P('Rmin{"time"}=? [ F "done" ]'),
            P('Rmax{"time"}=? [ F "done" ]'),
        ),
    ),
    Benchmark(
        "mdp_detour",
        "prism",
        ("mdp_detour.pm",),
        (
            P('Pmax=? [ F "goal" ]'),
            P('Pmin=? [ F "goal" ]'),
        ),
    ),
    Benchmark(
        "mdp_ec",
        "prism",
        ("mdp_ec.pm",),
        (
            P('Pmax=? [ F "goal" ]'),
            P('Pmin=? [ F "goal" ]'),
        ),
    ),
    Benchmark(
        "mdp_zero_ec",
        "prism",
        ("mdp_zero_ec.pm",),
        (
            P('Pmax=? [ F "goal" ]'),
            P('Rmin{"cost"}=? [ F "goal" ]'),
            P('Rmax{"cost"}=? [ F "goal" ]'),  # infinite: waiting forever is allowed
        ),
    ),
    Benchmark(
        "ma_jobs",
        "prism",
        ("ma_jobs.pm",),
        (
            P('Pmax=? [ F "done" ]'),
            P('Pmin=? [ F "done" ]'),
        ),
    ),
    Benchmark(
        "coin_explicit",
        "explicit",
        ("coin.tra", "coin.lab"),
        (P('P=? [ F "t" ]'),),
    ),
    Benchmark(
        "walk_explicit",
        "explicit",
        ("walk.tra", "walk.lab", "walk.rew"),
        (P('R=? [ F "end" ]'),),
    ),
    Benchmark(
        "mdp2_explicit",
        "explicit",
        ("mdp2.tra", "mdp2.lab"),
        (
            P('Pmax=? [ F "t" ]'),
            P('Pmin=? [ F "t" ]'),
        ),
    ),
    Benchmark(
        "slow_chain",
        "explicit",
        ("slow_chain.tra", "slow_chain.lab"),
        (P('P=? [ F "target" ]'),),
    ),
)

PARAMETRIC_BENCHMARKS: tuple[tuple[str, str, str], ...] = (
    # (name, prism file, target label)
    ("pdie", "pdie.pm", "one"),
    ("psmall", "psmall.pm", "target"),
)
