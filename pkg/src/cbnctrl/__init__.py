"""Targeted probabilistic control of discrete causal Bayesian networks."""

from .cbn import Cbn, Cpd, ZeroProbabilityError
from .control import (
    Budget,
    BudgetExceededError,
    ControlProblem,
    DEFAULT_BUDGET,
    Direction,
    DriverSet,
    Objective,
    Provenance,
    SolveResult,
    c_star,
    optimal_policy_value,
    solve,
    usm_adversarial_cbn,
)
from .graph import BcResult, CycleError, Dag, INF
from .intervention import (
    CLAMP,
    CLASS0,
    CLASS1,
    CLASS_INF,
    IDag,
    InterventionPair,
    InterventionPolicy,
    IpClass,
    apply_intervention,
    atomic_policy,
    build_idag,
    check_policies,
    classify_policy,
    i_subsumes,
    interventional_prob,
    scope_for_class,
    subsumes,
    surplus,
)
from .netfile import FORMAT, NetFormatError, NetworkSpec, load, parse, save, serialize
from .oracle import (
    SUITE_NAMES,
    SuiteReport,
    best_over_subsets,
    ci_holds,
    grid_policy_search,
    naive_policy_search,
    random_cbn,
    random_dag,
    random_problem,
    verify_extremality,
    verify_lemma3,
    verify_sufficiency,
    verify_usm,
)

__version__ = "0.1.0"

__all__ = [
    "BcResult",
    "Budget",
    "BudgetExceededError",
    "CLAMP",
    "CLASS0",
    "CLASS1",
    "CLASS_INF",
    "Cbn",
    "ControlProblem",
    "Cpd",
    "CycleError",
    "DEFAULT_BUDGET",
    "Dag",
    "Direction",
    "DriverSet",
    "FORMAT",
    "IDag",
    "INF",
    "InterventionPair",
    "InterventionPolicy",
    "IpClass",
    "NetFormatError",
    "NetworkSpec",
    "Objective",
    "Provenance",
    "SUITE_NAMES",
    "SolveResult",
    "SuiteReport",
    "ZeroProbabilityError",
    "apply_intervention",
    "atomic_policy",
    "best_over_subsets",
    "build_idag",
    "c_star",
    "check_policies",
    "ci_holds",
    "classify_policy",
    "grid_policy_search",
    "i_subsumes",
    "interventional_prob",
    "load",
    "naive_policy_search",
    "optimal_policy_value",
    "parse",
    "random_cbn",
    "random_dag",
    "random_problem",
    "save",
    "scope_for_class",
    "serialize",
    "solve",
    "subsumes",
    "surplus",
    "usm_adversarial_cbn",
    "verify_extremality",
    "verify_lemma3",
    "verify_sufficiency",
    "verify_usm",
]
