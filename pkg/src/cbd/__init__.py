"""Contextuality-by-Default analysis of finite systems of random variables.

Systems are split into binary indicators by a dichotomization plan and
tested for a coupling with multimaximal connections by exact linear
programming.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .coupling import (
    CdfTable,
    Coupling,
    check_categorical_splits_multimax,
    check_multimaximal_binary,
    forbidden_region_check,
    multimaximal_binary,
    nested_events_coupling,
    quantile_coupling,
)
from .decide import (
    CONTEXTUAL,
    NONCONTEXTUAL,
    Verdict,
    build_feasibility_lp,
    decide_contextuality,
    decide_single_connection_cuts,
    decide_traditional,
    decide_unsplit,
    dominance_aligned,
    nominal_dominance,
    two_variable_categorical,
    verify_witness,
)
from .lp import LPProblem, lp_feasible, lp_optimize
from .model import (
    CATEGORICAL,
    ORDERED,
    System,
    ValueSpace,
    add_deterministic,
    coarse_grain,
    connection,
    drop_variable,
    is_consistently_connected,
    make_system,
    single_connection,
    subsystem,
    validate_system,
)
from .split import (
    SplitPlan,
    determination_check,
    make_plan,
    plan_allowable,
    plan_cuts,
    plan_full_categorical,
    reduce_12,
    split_system,
)
from .vspace import VSpace, allowable_dichotomizations, is_vlinked, limit_points, vlinked_family

__all__ = [name for name in dir() if not name.startswith("_")]
