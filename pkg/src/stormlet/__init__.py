"""stormlet: an explicit-state probabilistic model checker.

Sparse DTMC/CTMC/MDP/MA models over float, exact-rational, and
rational-function domains; PRISM-subset and explicit-file frontends;
reachability, reward, and time-bounded checking with interchangeable
numeric, sound, and exact solvers; bisimulation minimization; and
parametric-chain analysis.
"""

from . import domains
from .bisimulation import initial_partition, minimize, quotient, refine
from .builder import BuildOptions, build_model, enumerate_initial_states, expand_state
from .checker import (
    CheckResult,
    CheckSettings,
    bounded_reachability,
    check,
    ctmc_timebounded,
    expected_reward,
    unbounded_reachability,
)
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
from .graph import mec_decomposition, prob01_deterministic, prob01_nondeterministic
from .models import (
    ChoiceStructure,
    Labeling,
    Model,
    RewardModel,
    embedded_dtmc,
    induced_untimed_mdp,
    uniformize,
    validate,
)
from .parametric import (
    Region,
    instantiate,
    parse_point,
    parse_region,
    region_lifting,
    solution_function,
)
from .prism import parse_constant_bindings, parse_program, pretty_program, substitute_constants
from .properties import desugar, parse_properties, parse_property, pretty_property
from .ratfunc import Polynomial, RationalFunction
from .sparse import SparseMatrix, backward_edges, from_triplets

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
