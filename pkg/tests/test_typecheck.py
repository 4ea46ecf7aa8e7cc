import pytest
from hypothesis import given

from impobj.harness import declarative_subtype_oracle
from impobj.syntax import alpha_eq, parse_term, parse_type, print_type
from impobj.syntax.ast import BOT, TOP, ObjSplit
from impobj.typecheck import (
    EMPTY,
    MUTATIONS,
    SPLIT,
    VARIANCE,
    Context,
    TermBind,
    TypeBind,
    TypeErr,
    TypeFuelExhausted,
    check,
    encode_to_split,
    is_subtype,
    subtype,
    typable,
    typeof,
    wf_context,
    wf_type,
)

from .strategies import UNIVERSE, closed_types, universe_types, well_typed

T = parse_type


def sub(a, b, ctx=EMPTY, mode=VARIANCE):
    return subtype(ctx, T(a), T(b), mode=mode)


# -- well-formedness --------------------------------------------------------


def test_wf_type_examples():
    assert wf_type(EMPTY, TOP)
    assert not wf_type(EMPTY, T("X"))
    assert wf_type(Context([TypeBind("X", TOP)]), T("All(Y<:X) Y -> X"))


def test_wf_context_rejects_duplicates_and_unbound():
    assert wf_context(Context([TypeBind("X", TOP), TermBind("x", T("X"))]))
    assert not wf_context(Context([TermBind("x", TOP), TermBind("x", TOP)]))
    assert not wf_context(Context([TermBind("x", T("X"))]))


def test_self_types_are_well_formed():
    assert wf_type(EMPTY, T("Obj(X)[retrieve:inv X, backup:inv X]"))


# -- subtyping ----------------------------------------------------------------


@pytest.mark.parametrize(
    "a, b",
    [
        ("[m:inv Top, n:inv Bot]", "[m:inv Top]"),
        ("[m:inv Top]", "[m:cov Top]"),
        ("[m:inv Top]", "[m:con Top]"),
        ("Mu(X) [m:cov X, n:cov Top]", "Mu(Y) [m:cov Y]"),
        ("[m:cov [n:inv Top]]", "[m:cov []]"),
        ("[m:con []]", "[m:con [n:inv Top]]"),
        ("Top -> Bot", "Bot -> Top"),
        ("Bot", "[m:inv Top]"),
        ("[m:inv Top]", "Top"),
        ("All(X<:Top) X -> X", "All(X<:Top) X -> X"),
        ("Some(X<:[m:inv Top]) X", "Some(X<:Top) X"),
        ("Obj(X)[m:inv X]", "Obj(Y)[m:inv Y]"),
    ],
)
def test_subtype_yes(a, b):
    assert sub(a, b).verdict == "yes"


@pytest.mark.parametrize(
    "a, b",
    [
        ("[m:inv Top]", "[m:inv Top, n:inv Bot]"),
        ("[m:cov Top]", "[m:inv Top]"),
        ("[m:con Top]", "[m:cov Top]"),
        ("[m:inv [n:inv Top]]", "[m:inv []]"),
        ("[m:cov []]", "[m:cov [n:inv Top]]"),
        ("Bot -> Top", "Top -> Bot"),
        ("Top", "Bot"),
        ("Mu(Y) [m:cov Y]", "Mu(X) [m:cov X, n:cov Top]"),
        ("Some(X<:Top) X", "Some(X<:[m:inv Top]) X"),
    ],
)
def test_subtype_no(a, b):
    r = sub(a, b)
    assert r.verdict == "no"
    assert r.explanation


def test_variables_promote_to_bounds():
    ctx = Context([TypeBind("X", T("[m:inv Top, n:inv Top]"))])
    assert sub("X", "[m:cov Top]", ctx).yes
    assert not sub("[m:cov Top]", "X", ctx).yes
    assert sub("X", "X", ctx).yes


def test_split_mode_subobj_gen():
    assert sub("[m:(Bot, [n:inv Top])]", "[m:(Bot, [])]", mode=SPLIT).yes
    assert not sub("[m:(Bot, [])]", "[m:(Bot, [n:inv Top])]", mode=SPLIT).yes
    assert sub("[m:([], Top)]", "[m:([n:inv Top], Top)]", mode=SPLIT).yes
    # [m:con Bot] and [m:cov Top] coincide after encoding
    assert sub("[m:con Bot]", "[m:cov Top]", mode=SPLIT).yes
    assert not sub("[m:con Bot]", "[m:cov Top]").yes


def test_fuel_exhaustion_is_a_third_verdict():
    a, b = T("Mu(X) [m:cov X, n:cov Top]"), T("Mu(Y) [m:cov Y]")
    assert subtype(EMPTY, a, b, fuel=1).verdict == "unknown"
    assert subtype(EMPTY, a, b, fuel=1000).verdict == "yes"
    assert "fuel" in str(subtype(EMPTY, a, b, fuel=1))


def test_is_subtype_wrapper():
    assert is_subtype(T("[m:inv Top]"), T("[]"))


@given(universe_types)
def test_reflexivity(A):
    assert subtype(EMPTY, A, A).yes


@given(universe_types, universe_types, universe_types)
def test_transitivity(A, B, C):
    if subtype(EMPTY, A, B).yes and subtype(EMPTY, B, C).yes:
        assert subtype(EMPTY, A, C).yes


def test_transitivity_over_chains():
    # sampled exhaustively over a slice: avoid relying on hypothesis assume rates
    sl = UNIVERSE[::97]
    yes = {(i, j) for i, a in enumerate(sl) for j, b in enumerate(sl) if subtype(EMPTY, a, b).yes}
    for i, j in yes:
        for j2, k in yes:
            if j2 == j:
                assert (i, k) in yes


@given(universe_types, universe_types)
def test_agrees_with_declarative_oracle(A, B):
    assert subtype(EMPTY, A, B).yes == declarative_subtype_oracle(EMPTY, A, B)


@given(universe_types, universe_types)
def test_encoding_preserves_yes(A, B):
    if subtype(EMPTY, A, B).yes:
        assert subtype(EMPTY, A, B, mode=SPLIT).yes


@given(closed_types)
def test_top_and_bot_bound_everything(A):
    assert subtype(EMPTY, A, TOP).yes and subtype(EMPTY, BOT, A).yes


# -- encoding -----------------------------------------------------------------


@pytest.mark.parametrize(
    "src, out",
    [
        ("[m:inv Top -> Top]", "[m:(Top -> Top, Top -> Top)]"),
        ("[m:cov Top -> Top]", "[m:(Bot, Top -> Top)]"),
        ("[m:con Top -> Top]", "[m:(Top -> Top, Top)]"),
        ("[m:cov [n:con Top]] -> Top", "[m:(Bot, [n:(Top, Top)])] -> Top"),
    ],
)
def test_encode_to_split(src, out):
    assert alpha_eq(encode_to_split(T(src)), T(out))


def test_encode_rejects_split_input():
    with pytest.raises(ValueError):
        encode_to_split(T("[m:(Bot, Top)]"))


@given(closed_types)
def test_encoding_leaves_no_variance_objects(A):
    enc = encode_to_split(A)

    def walk(t):
        from impobj.syntax.ast import ObjV

        assert not isinstance(t, ObjV)
        for k in t.children():
            walk(k)

    walk(enc)


# -- typing -------------------------------------------------------------------


def ty(src, mode=VARIANCE):
    return typeof(None, parse_term(src), mode)


def test_obj_rule():
    A = "[m:inv Top]"
    assert alpha_eq(ty(f"obj {A} {{m = ς(s:{A}) s.m}}"), T(A))


def test_inv_needs_readable_method():
    with pytest.raises(TypeErr) as e:
        ty("λ(a:[m:con Top]) a.m")
    assert e.value.rule == "Inv"
    assert alpha_eq(ty("λ(a:[m:cov Top]) a.m"), T("[m:cov Top] -> Top"))


def test_upd_needs_writable_method():
    with pytest.raises(TypeErr) as e:
        ty("λ(a:[m:cov Top]) a.m := ς(s:[m:cov Top]) s")
    assert e.value.rule == "Upd"
    ty("λ(a:[m:con Top]) a.m := ς(s:[m:con Top]) s")


def test_split_inv_and_upd_gen():
    got = ty("λ(a:[m:(Bot, [])]) a.m", SPLIT)
    assert alpha_eq(got, encode_to_split(T("[m:(Bot, [])] -> []"), strict=False))
    with pytest.raises(TypeErr):
        ty("λ(a:[m:(Bot, [])]) a.m := ς(s:[m:(Bot, [])]) obj [] {}", SPLIT)
    ty("λ(a:[m:(Bot, [])]) λ(b:Bot) a.m := ς(s:[m:(Bot, [])]) b", SPLIT)


def test_split_annotation_rejected_in_variance_mode():
    with pytest.raises(TypeErr):
        ty("λ(a:[m:(Bot, [])]) a")


def test_bot_receivers_synthesize_bot():
    assert alpha_eq(ty("λ(x:Bot) x.m"), T("Bot -> Bot"))
    assert alpha_eq(ty("λ(x:Bot) x (obj [] {})"), T("Bot -> Bot"))


def test_check_uses_subsumption():
    assert check(None, parse_term("λ(x:Top) x"), T("Top -> Top"))
    assert check(None, parse_term("λ(x:Top) x"), T("Bot -> Top"))
    o = "obj [m:inv [n:inv Top]] {m = ς(s:[m:inv [n:inv Top]]) obj [n:inv Top] {n = ς(t:[n:inv Top]) t}}"
    assert check(None, parse_term(o), T("[m:cov []]"))
    with pytest.raises(TypeErr):
        check(None, parse_term(o), T("[m:inv []]"))


def test_type_errors_name_rule_and_subterm():
    with pytest.raises(TypeErr) as e:
        ty("(λ(x:[m:inv Top]) x.m) (obj [] {})")
    err = e.value
    assert err.rule == "App" and err.term is not None
    assert "type error in rule App" in err.render()


def test_open_rejects_escaping_witness():
    with pytest.raises(TypeErr):
        ty("open pack<X<:Top=Top, obj [] {} : X> as <X<:Top, x:X> in x : X")


def test_pack_rechecks_substituted_payload():
    assert alpha_eq(ty("pack<X<:Top=[], obj [] {} : X>"), T("Some(X<:Top) X"))
    with pytest.raises(TypeErr):
        ty("pack<X<:[m:inv Top]=[], obj [] {} : X>")


def test_fold_unfold():
    t = ty("λ(x:Mu(X) [m:cov X]) (unfold[Mu(X) [m:cov X]] x).m")
    assert alpha_eq(t, T("(Mu(X) [m:cov X]) -> Mu(X) [m:cov X]"))


def test_clone_keeps_receiver_type():
    assert alpha_eq(ty("λ(x:[m:con Top]) clone(x)"), T("[m:con Top] -> [m:con Top]"))


def test_typable_and_fuel():
    assert typable(parse_term("(obj [] {}).m")) is None
    with pytest.raises(TypeFuelExhausted):
        typeof(None, parse_term("λ(x:Mu(X) [m:cov X]) (λ(y:Mu(Y) [m:cov Y]) y) x"), fuel=1)


def test_mutations_accept_unsound_programs():
    prog = parse_term("λ(a:[m:con Top]) a.m")
    assert typable(prog) is None
    assert MUTATIONS
    accepted = [m for m in MUTATIONS if typable(prog, mutation=m) is not None]
    assert accepted


def test_unknown_mode_and_mutation():
    with pytest.raises(ValueError):
        typeof(None, parse_term("λ(x:Top) x"), "lenient")
    with pytest.raises(ValueError):
        typeof(None, parse_term("λ(x:Top) x"), mutation="nope")


@given(well_typed(depth=5))
def test_generated_programs_typecheck_at_their_type(prog):
    t, A = prog
    assert check(None, t, A)


@given(well_typed(depth=5))
def test_variance_typable_implies_split_typable(prog):
    t, _ = prog
    assert typable(t, SPLIT) is not None


def test_split_types_print_as_pairs():
    A = encode_to_split(T("[m:cov Top]"))
    assert isinstance(A, ObjSplit)
    assert print_type(A) == "[m:(Bot, Top)]"
