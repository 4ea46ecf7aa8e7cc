"""Budgeted renditions of the step-indexed semantic model.

Codes (closed syntactic types plus approximation, reference and recursive
record forms) denote semantic types; ``Engine`` decides membership of
values and terms at each step index within a sampling ``Budget`` and
returns three-valued ``Verdict``s.
"""
from .codes import (
    Approx,
    LocVal,
    RecRec,
    Ref,
    RefSplit,
    UnboundTypeVariable,
    approx_code,
    approx_env,
    ceiling,
    interp,
    method_ref,
    rec_record,
    ref_bounds,
    show_code,
    strip,
    unroll,
)
from .engine import OMEGA, Engine, IndexGaugeError, engine_for
from .lemmas import (
    REGISTRY,
    STOCK_MUTATIONS,
    VACUOUS,
    LemmaReport,
    UnknownLemma,
    UnknownMutation,
    check_lemma,
    default_mutation,
    judge,
    lemma_for_mutation,
    lemma_names,
    mutation_suite,
    replay,
    suite,
)
from .verdict import COUNTEREXAMPLE, EMPTY_PSI, HOLDS, INCONCLUSIVE, Budget, Psi, Verdict


def _engine(budget):
    return engine_for(budget)


def mem_value(k, psi, v, tau, budget=None) -> Verdict:
    return _engine(budget).mem_value(k, psi, v, tau)


def mem_term(k, psi, a, tau, budget=None, heaps=()) -> Verdict:
    return _engine(budget).mem_term(k, psi, a, tau, heaps)


def heap_typed(h, k, psi, budget=None) -> Verdict:
    return _engine(budget).heap_typed(h, k, psi)


def approx_eq(t1, t2, k, budget=None) -> Verdict:
    return _engine(budget).approx_eq(t1, t2, k)


def state_extends(k, psi, j, psi2, budget=None) -> Verdict:
    return _engine(budget).state_extends(k, psi, j, psi2)


def sem_subset(t1, t2, budget=None) -> Verdict:
    return _engine(budget).sem_subset(t1, t2)


def tsubself_check(w, alpha, budget=None) -> Verdict:
    return _engine(budget).tsubself(w, alpha)


__all__ = [
    "COUNTEREXAMPLE",
    "EMPTY_PSI",
    "HOLDS",
    "INCONCLUSIVE",
    "OMEGA",
    "REGISTRY",
    "STOCK_MUTATIONS",
    "VACUOUS",
    "Approx",
    "Budget",
    "Engine",
    "IndexGaugeError",
    "LemmaReport",
    "LocVal",
    "Psi",
    "RecRec",
    "Ref",
    "RefSplit",
    "UnboundTypeVariable",
    "UnknownLemma",
    "UnknownMutation",
    "Verdict",
    "approx_code",
    "approx_env",
    "approx_eq",
    "ceiling",
    "check_lemma",
    "default_mutation",
    "engine_for",
    "heap_typed",
    "interp",
    "judge",
    "lemma_for_mutation",
    "lemma_names",
    "mem_term",
    "mem_value",
    "method_ref",
    "mutation_suite",
    "rec_record",
    "ref_bounds",
    "replay",
    "sem_subset",
    "show_code",
    "state_extends",
    "strip",
    "suite",
    "tsubself_check",
    "unroll",
]
