import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from impobj.stepmodel import (
    COUNTEREXAMPLE,
    EMPTY_PSI,
    REGISTRY,
    STOCK_MUTATIONS,
    Approx,
    Budget,
    Engine,
    IndexGaugeError,
    Psi,
    RecRec,
    UnknownLemma,
    UnknownMutation,
    approx_code,
    approx_eq,
    check_lemma,
    default_mutation,
    heap_typed,
    interp,
    lemma_for_mutation,
    lemma_names,
    mem_term,
    mem_value,
    replay,
    sem_subset,
    state_extends,
    tsubself_check,
)
from impobj.stepmodel.catalog import VALUES, WITNESSES, catalog_summary
from impobj.stepmodel.codes import ceiling, method_ref, ref_bounds, strip
from impobj.stepmodel.engine import replay_witness, witness_runs
from impobj.stepmodel.examples import CLAIM, PSI, VALUE, confirm_with_evaluator, false_positive, first_failing_index
from impobj.syntax import parse_term, parse_type
from impobj.syntax.ast import BOT, TOP, SelfObj
from impobj.typecheck import EMPTY, subtype, typable

T, P = parse_type, parse_term

CODES = [interp(T(s)) for s in (
    "Top",
    "Bot",
    "[]",
    "[m:inv Top]",
    "[m:cov Top]",
    "[m:con Top]",
    "[m:inv Top, n:inv Top]",
    "Top -> Top",
    "[m:inv Top] -> Top",
    "Top -> [q:inv Top]",
    "Mu(X) [m:cov X]",
    "All(X<:Top) X -> X",
    "Some(X<:Top) X",
)]

E = Engine(Budget(k_max=4))


# -- codes --------------------------------------------------------------------


@given(st.sampled_from(CODES), st.integers(0, 8), st.integers(0, 8))
def test_approximation_composes_to_minimum(c, j, k):
    assert ceiling(approx_code(approx_code(c, j), k)) == min(j, k)
    assert strip(approx_code(approx_code(c, j), k)) == strip(c)


def test_approx_none_is_identity():
    c = interp(T("[m:inv Top]"))
    assert approx_code(c, None) is c
    assert isinstance(approx_code(c, 2), Approx)


def test_reference_bounds():
    p = T("[m:inv Top]")
    from impobj.stepmodel import Ref, RefSplit

    assert ref_bounds(Ref("inv", p)) == (p, p)
    assert ref_bounds(Ref("cov", p)) == (BOT, p)
    assert ref_bounds(Ref("con", p)) == (p, TOP)
    assert ref_bounds(RefSplit(BOT, p)) == (BOT, p)


def test_method_ref_for_object_codes():
    w = T("[m:cov Top]")
    lo, hi = method_ref(T("[m:cov Top]"), "m", w)
    assert lo == BOT and hi == T("[m:cov Top] -> Top")
    assert method_ref(T("[m:cov Top]"), "n", w) is None


def test_interp_desugars_self_types_by_default():
    c = interp(T("Obj(X)[m:inv X]"))
    assert not isinstance(c, SelfObj)
    assert isinstance(interp(T("Obj(X)[m:inv X]"), self_types="direct"), (SelfObj, RecRec))


def test_interp_rejects_open_types():
    from impobj.stepmodel import UnboundTypeVariable

    with pytest.raises(UnboundTypeVariable):
        interp(T("X -> X"))
    assert interp(T("X -> X"), {"X": TOP}) == T("Top -> Top")


def test_catalog_sizes():
    s = catalog_summary()
    assert s["values"] >= 20 and s["witnesses"] >= 10
    assert len(VALUES) == s["values"] and len(WITNESSES) == s["witnesses"]


# -- membership ---------------------------------------------------------------

PSI_M = Psi({0: T("[m:inv Top] -> Top")})
OBJ = P("{m = l0}")


@pytest.mark.parametrize(
    "code, expected",
    [
        ("[m:inv Top]", "Holds"),
        ("[m:cov Top]", "Holds"),
        ("[m:con Top]", "Holds"),
        ("[]", "Holds"),
        ("Top", "Holds"),
        ("[n:inv Top]", "Counterexample"),
        ("Bot", "Counterexample"),
        ("Top -> Top", "Counterexample"),
    ],
)
def test_object_membership(code, expected):
    for k in (1, 3):
        assert mem_value(k, PSI_M, OBJ, interp(T(code))).kind == expected


def test_procedure_membership():
    ident = P("λ(x:Top) x")
    assert mem_value(3, EMPTY_PSI, ident, interp(T("Top -> Top"))).holds
    assert mem_value(3, EMPTY_PSI, ident, interp(T("[m:inv Top] -> [m:cov Top]"))).holds
    assert mem_value(3, EMPTY_PSI, ident, interp(T("Top -> [m:inv Top]"))).is_counterexample


def test_open_code_is_rejected():
    with pytest.raises(ValueError):
        mem_value(1, EMPTY_PSI, OBJ, T("X"))


def test_term_membership_runs_the_term():
    a = P("(λ(x:Top) x) (obj [m:inv Top] {m = ς(s:[m:inv Top]) s})")
    assert mem_term(4, EMPTY_PSI, a, interp(T("[m:inv Top]"))).holds
    assert mem_term(4, EMPTY_PSI, a, interp(T("[n:inv Top]"))).is_counterexample
    stuck = P("(obj [] {}).m")
    v = mem_term(3, EMPTY_PSI, stuck, TOP)
    assert v.is_counterexample


def test_term_membership_is_vacuous_at_zero():
    assert mem_term(0, EMPTY_PSI, P("(obj [] {}).m"), BOT).holds


def test_nested_term_check_trips_the_gauge():
    eng = Engine(Budget(k_max=3))
    eng._gauge.append(2)
    try:
        with pytest.raises(IndexGaugeError):
            eng.mem_term(2, EMPTY_PSI, P("λ(x:Top) x"), TOP)
    finally:
        eng._gauge.pop()


def test_heap_typing():
    good = {0: P("λ(s:[m:inv Top]) s")}
    assert heap_typed(good, 3, PSI_M).holds
    assert heap_typed({}, 3, PSI_M).is_counterexample
    assert heap_typed(good, 3, Psi({0: T("[m:inv Top] -> [n:inv Top]")})).is_counterexample


def test_state_extension():
    assert state_extends(3, PSI_M, 2, PSI_M.approx(2)).holds
    assert state_extends(2, PSI_M, 3, PSI_M).is_counterexample
    bigger = PSI_M.extend({1: TOP})
    assert state_extends(3, PSI_M, 3, bigger).holds
    assert state_extends(3, bigger, 3, PSI_M).is_counterexample


def test_approx_eq():
    a, b = interp(T("[m:inv Top]")), interp(T("[m:cov Top]"))
    assert approx_eq(a, a, 5).holds
    assert approx_eq(a, b, 0).holds
    assert approx_eq(a, b, 3).is_counterexample


def test_semantic_subset():
    a, b = interp(T("[m:inv Top]")), interp(T("[m:cov Top]"))
    assert not sem_subset(a, b).is_counterexample
    assert sem_subset(b, a).is_counterexample


def test_self_exposure():
    inv = interp(T("[m:inv Top]"))
    assert tsubself_check(inv, inv).holds
    assert tsubself_check(interp(T("[m:inv Top, n:inv Top]")), inv).holds
    assert tsubself_check(interp(T("[]")), inv).is_counterexample
    assert tsubself_check(interp(T("[m:cov Top]")), inv).is_counterexample
    with pytest.raises(ValueError):
        tsubself_check(TOP, TOP)


# -- semantic properties over the catalog -------------------------------------

members = st.tuples(st.sampled_from(range(len(VALUES))), st.sampled_from(CODES), st.integers(1, 4))


def _placed(i):
    delta, v = VALUES[i]
    return Psi(dict(delta)), v


@given(members)
def test_downward_closure(m):
    i, c, k = m
    psi, v = _placed(i)
    if mem_value(k, psi, v, c).holds:
        for j in range(k):
            assert not mem_value(j, psi, v, c).is_counterexample


@given(members)
def test_approximation_bounds_membership(m):
    i, c, k = m
    psi, v = _placed(i)
    for j in range(k + 1):
        inside = mem_value(j, psi, v, approx_code(c, k))
        plain = mem_value(j, psi, v, c)
        if j < k:
            assert inside.kind == plain.kind
        else:
            assert inside.is_counterexample


@given(st.sampled_from(CODES), st.sampled_from(CODES))
def test_syntactic_subtyping_is_semantically_sound(a, b):
    if subtype(EMPTY, a, b).yes:
        assert not sem_subset(a, b, Budget(k_max=3)).is_counterexample


@given(st.sampled_from(CODES), st.integers(0, 5))
def test_approx_eq_reflexive(c, k):
    assert approx_eq(c, c, k).holds


# -- the false positive -------------------------------------------------------


def test_false_positive_holds_early():
    assert false_positive(2).holds
    assert first_failing_index() == 4


@pytest.mark.parametrize("k", [4, 5, 6])
def test_false_positive_refuted_late_with_replayable_witness(k):
    v = false_positive(k)
    assert v.is_counterexample
    assert witness_runs(v.detail)
    assert replay_witness(v.detail)


def test_false_positive_agrees_with_evaluator():
    rules = confirm_with_evaluator()
    assert rules[:3] == ["Red-Beta", "Red-Inv", "Red-Beta"]
    assert rules[-2] == "value" and "q" not in rules[-1]


def test_false_positive_value_is_ill_typed():
    assert typable(VALUE) is None
    assert CLAIM == T("Top -> [q:inv Top]") and 0 in PSI


# -- lemmas -------------------------------------------------------------------


def test_registry_covers_the_groups():
    groups = {l.group for l in REGISTRY.values()}
    assert {"procedure", "reference", "object", "generalized", "quantifier", "recursive", "self", "structural", "semantic-type"} <= groups
    assert len(REGISTRY) >= 40
    assert "SemSubVarRef" in lemma_names("reference")


def test_unknown_names():
    with pytest.raises(UnknownLemma):
        check_lemma("NoSuchLemma")
    with pytest.raises(UnknownMutation):
        lemma_for_mutation("nope")
    with pytest.raises(UnknownMutation):
        default_mutation("SemLam")


def test_variable_reference_lemma_holds():
    rep = check_lemma("SemSubVarRef", Budget(k_max=4, seed=7))
    assert rep.verdict.holds
    assert rep.counts()[COUNTEREXAMPLE] == 0


@pytest.mark.parametrize("name, mutation", STOCK_MUTATIONS)
def test_mutations_are_caught_and_replay(name, mutation):
    rep = check_lemma(name, Budget(k_max=5, seed=1), mutation)
    assert rep.counterexamples
    record = json.loads(json.dumps(rep.counterexamples[0].to_json()))
    again = replay(record)
    assert again.outcome == COUNTEREXAMPLE


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_stock_lemma_has_no_counterexample(name):
    rep = check_lemma(name, Budget(k_max=4, seed=3))
    assert rep.counts()[COUNTEREXAMPLE] == 0, [r.to_json() for r in rep.counterexamples[:1]]


def test_instance_records_are_json():
    rep = check_lemma("SemApp", Budget(k_max=3))
    for r in rep.results:
        json.dumps(r.to_json())


@given(st.integers(0, 2**16))
def test_lemma_results_are_seed_reproducible(seed):
    b = Budget(k_max=3, seed=seed)
    a = [r.outcome for r in check_lemma("SemSubCovRef", b).results]
    c = [r.outcome for r in check_lemma("SemSubCovRef", Budget(k_max=3, seed=seed), engine=Engine(b)).results]
    assert a == c


def test_budget_validation():
    with pytest.raises(ValueError):
        Budget(k_max=-1)
    with pytest.raises(ValueError):
        Budget(samples=0)
    assert Budget(seed=3).stream("x") == Budget(seed=3).stream("x")
