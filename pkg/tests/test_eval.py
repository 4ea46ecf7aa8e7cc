import pytest
from hypothesis import given
from hypothesis import strategies as st

from impobj.eval import (
    CanonicalAllocator,
    Config,
    Irreducible,
    Stepped,
    make_allocator,
    run,
    run_term,
    safe_k,
    step,
    traces_loc_equiv,
)
from impobj.harness import load_file, default_corpus_dir
from impobj.syntax import alpha_eq, parse_term
from impobj.syntax.ast import TOP, App, Clone, Invoke, RuntimeObj, Update

from .strategies import well_typed


def first_step(src, heap=None):
    r = step(Config(heap or {}, parse_term(src)), CanonicalAllocator())
    assert isinstance(r, Stepped)
    return r


def test_red_obj_allocates_one_location_per_method():
    r = first_step("obj [m:inv Top] {m = ς(s:[m:inv Top]) s.m}")
    assert r.rule == "Red-Obj"
    assert r.config.term == RuntimeObj((("m", 0),))
    assert alpha_eq(r.config.heap[0], parse_term("λ(s:[m:inv Top]) s.m"))


def test_canonical_allocation_follows_method_names():
    r = first_step("obj [n:inv Top, m:inv Top] {n = ς(s:[n:inv Top, m:inv Top]) s, m = ς(s:[n:inv Top, m:inv Top]) s.n}")
    locs = dict(r.config.term.locs)
    assert locs == {"m": 0, "n": 1}


def test_red_inv_applies_stored_procedure_to_object():
    o = RuntimeObj((("m", 0),))
    heap = {0: parse_term("λ(s:Top) s")}
    assert step(Config(heap, o)) == Irreducible("value")
    r = step(Config(heap, Invoke(o, "m")))
    assert r.rule == "Red-Inv"
    assert r.config.term == App(heap[0], o)
    assert r.config.heap == heap


def test_red_upd_overwrites_and_returns_same_object():
    o = RuntimeObj((("m", 0),))
    heap = {0: parse_term("λ(s:Top) s")}
    r = step(Config(heap, Update(o, "m", "s", TOP, parse_term("obj [] {}"))))
    assert r.rule == "Red-Upd"
    assert r.config.term == o
    assert alpha_eq(r.config.heap[0], parse_term("λ(s:Top) obj [] {}"))


def test_red_clone_copies_current_contents():
    o = RuntimeObj((("m", 0), ("n", 1)))
    heap = {0: parse_term("λ(s:Top) s"), 1: parse_term("λ(s:Top) s.m")}
    r = step(Config(heap, Clone(o)))
    assert r.rule == "Red-Clone"
    assert r.config.term == RuntimeObj((("m", 2), ("n", 3)))
    assert r.config.heap[2] == heap[0] and r.config.heap[3] == heap[1]
    assert r.allocated == (2, 3)


@pytest.mark.parametrize(
    "src, rule, result",
    [
        ("(λ(x:Top) x) (λ(y:Top) y)", "Red-Beta", "λ(y:Top) y"),
        ("(Fun(X<:Top) λ(x:X) x)[Top -> Top]", "Red-TBeta", "λ(x:Top -> Top) x"),
        ("unfold[Mu(X) X -> X] (fold[Mu(X) X -> X] λ(x:Mu(X) X -> X) x)", "Red-Unfold", "λ(x:Mu(X) X -> X) x"),
        ("open pack<X<:Top=Top -> Top, λ(y:Top) y : X> as <X<:Top, x:X> in λ(z:X) x : Top", "Red-Open", "λ(z:Top -> Top) λ(y:Top) y"),
    ],
)
def test_functional_rules(src, rule, result):
    r = first_step(src)
    assert r.rule == rule
    assert alpha_eq(r.config.term, parse_term(result))


def test_call_by_value_order():
    tr = run_term(parse_term("(λ(x:Top) x) ((λ(y:Top) y) (λ(z:Top) z))"), 10)
    assert [s.rule for s in tr.steps] == ["Red-Beta", "Red-Beta"]
    assert alpha_eq(tr.steps[0].config.term, parse_term("(λ(x:Top) x) (λ(z:Top) z)"))


@pytest.mark.parametrize(
    "src, reason",
    [
        ("(obj [] {}).m", "missing-method"),
        ("(obj [] {}) (λ(x:Top) x)", "apply-non-lambda"),
        ("x", None),
    ],
)
def test_stuck_configurations(src, reason):
    tr = run_term(parse_term(src), 10)
    assert tr.outcome == "stuck"
    if reason is not None:
        assert tr.reason == reason


def test_fuel_exhaustion():
    tr = run_term(parse_term("(obj [m:inv Top] {m = ς(s:[m:inv Top]) s.m}).m"), 7)
    assert tr.outcome == "fuel" and len(tr) == 7


def test_zero_fuel():
    tr = run_term(parse_term("(λ(x:Top) x) (λ(y:Top) y)"), 0)
    assert tr.outcome == "fuel" and len(tr) == 0
    assert run_term(parse_term("λ(y:Top) y"), 0).outcome == "value"


def test_safe_k_is_exact():
    c = Config({}, parse_term("(obj [m:inv Top] {m = ς(s:[m:inv Top]) s}).n"))
    assert safe_k(c, 0) and safe_k(c, 1)
    assert not safe_k(c, 2)
    assert not safe_k(c, 500)


def test_safe_k_on_divergence():
    c = Config({}, parse_term("(obj [m:inv Top] {m = ς(s:[m:inv Top]) s.m}).m"))
    assert safe_k(c, 500)


def test_backup_then_retrieve_returns_fresh_clone():
    prog = load_file(default_corpus_dir() / "backup_retrieve_mu.sigma")
    tr = run_term(prog.term(), 500)
    assert tr.outcome == "value"
    created = next(s.allocated for s in tr.steps if s.rule == "Red-Obj")
    cloned = next(s.allocated for s in tr.steps if s.rule == "Red-Clone")
    final = tr.final.term
    assert isinstance(final, RuntimeObj)
    assert {n for n, _ in final.locs} == {"retrieve", "backup"}
    assert {l for _, l in final.locs} == set(cloned)
    assert not set(cloned) & set(created)


def test_trace_render_and_json():
    tr = run_term(parse_term("(λ(x:Top) x) (λ(y:Top) y)"), 5)
    assert tr.render().splitlines() == [
        "[0] start heap={} term=(λ(x:Top) x) (λ(y:Top) y)",
        "[1] Red-Beta heap={} term=λ(y:Top) y",
        "outcome: Value",
    ]
    j = tr.to_json()
    assert j["length"] == 1 and j["steps"][0]["rule"] == "Red-Beta" and j["outcome"] == "value"


def test_make_allocator():
    assert isinstance(make_allocator("canonical"), CanonicalAllocator)
    make_allocator("random:3")
    with pytest.raises(ValueError):
        make_allocator("fancy")


def test_random_allocator_is_seeded():
    t = parse_term("clone(obj [m:inv Top, n:inv Top] {m = ς(s:[m:inv Top, n:inv Top]) s, n = ς(s:[m:inv Top, n:inv Top]) s})")
    a = run_term(t, 10, make_allocator("random:5"))
    b = run_term(t, 10, make_allocator("random:5"))
    assert a.final.term == b.final.term
    c = run_term(t, 10)
    assert traces_loc_equiv(a, c)


def test_loc_equivalence_detects_differences():
    t1 = run_term(parse_term("(λ(x:Top) x) (λ(y:Top) y)"), 5)
    t2 = run_term(parse_term("(λ(x:Top) x) (λ(y:Top) x)"), 5)
    assert not traces_loc_equiv(t1, t2)


@given(well_typed(depth=5), st.integers(0, 10_000))
def test_allocator_independence(prog, seed):
    t, _ = prog
    canon = run_term(t, 200)
    rand = run_term(t, 200, make_allocator(f"random:{seed}"))
    assert traces_loc_equiv(canon, rand)


@given(well_typed(depth=5))
def test_deterministic(prog):
    t, _ = prog
    a, b = run_term(t, 200), run_term(t, 200)
    assert [s.rule for s in a.steps] == [s.rule for s in b.steps]
    assert a.final == b.final


@given(well_typed(depth=5))
def test_run_prefix_consistency(prog):
    t, _ = prog
    full = run(Config({}, t), 60)
    part = run(Config({}, t), 20)
    assert [s.rule for s in part.steps] == [s.rule for s in full.steps[: len(part.steps)]]
