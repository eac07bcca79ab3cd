"""Proof checker for a pedagogically restricted calculus of constructions.

The kernel checks three systems sharing one term language: the full
calculus, a restricted variant whose product formation demands a witness
inhabitant, and a naive system that instead asks for closed motivation
terms at the leaves.  Around the kernel: a normalizer, a bounded
inhabitation search, a constructive witness extractor for well-formed
restricted environments, an arithmetic prelude of iterator-encoded
naturals, a small surface language, and generators for the property
suites.
"""

from .inhabit import (
    DEFAULT_SEARCH_DEPTH,
    MotivationResult,
    check_poincare,
    inhabit_applied,
    inhabit_closed,
    inhabit_from_prod_derivation,
    inhabit_search,
    inhabit_type_sorted,
    make_search_oracle,
    motivate_env,
    motivate_judgment,
    usefulness_argument,
)
from .kernel import (
    Checker,
    Derivation,
    Diagnostic,
    HasType,
    Judgment,
    Motivation,
    SystemMode,
    WellFormed,
    check_motivated_env,
    check_type,
    check_wf,
    contract_derivation,
    derivation_height,
    derivation_to_dict,
    infer_type,
    infer_with_sort,
    iter_nodes,
    naive_p_examples,
    relabel_restricted_products,
    verify_derivation,
)
from .reduction import (
    DEFAULT_FUEL,
    FuelExhausted,
    beta_step,
    convertible,
    normalize,
    one_step_reducts,
    whnf,
)
from .terms import (
    PROP,
    TYPE,
    Abs,
    App,
    Bound,
    EnvEntry,
    Environment,
    Free,
    Prod,
    Sort,
    SortConst,
    Term,
    apps,
    arrow,
    env_of,
    free_vars,
    is_closed,
    lift,
    subst,
    subst_simultaneous,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
