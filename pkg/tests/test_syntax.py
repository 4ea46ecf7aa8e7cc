import pytest
from hypothesis import given

from impobj.harness import load_corpus
from impobj.syntax import (
    ParseError,
    alpha_eq,
    desugar_self,
    desugar_self_in_term,
    erase_annotations,
    free_vars,
    parse_term,
    parse_type,
    print_term,
    print_type,
    subst_type,
    to_json,
)
from impobj.syntax.ast import TOP, App, Clone, Lam, Mu, ObjV, Some, TVar, Update, Var

from .strategies import closed_types, universe_types, well_typed


def test_let_desugars_to_application():
    t = parse_term("let x : [m:inv Top] = obj [m:inv Top] {m = ς(s:[m:inv Top]) s} in x.m")
    assert isinstance(t, App) and isinstance(t.fun, Lam)
    assert t.fun.var == "x"
    assert print_type(t.fun.annot) == "[m:inv Top]"


def test_unannotated_let_binds_at_top():
    t = parse_term("let z = clone(x) in x.retrieve := ς(y:Top) z")
    assert isinstance(t.fun, Lam) and t.fun.annot == TOP
    assert isinstance(t.arg, Clone) and t.arg.arg == Var("x")
    assert isinstance(t.fun.body, Update)


@pytest.mark.parametrize(
    "ascii_src, unicode_src",
    [
        ("\\(x:Top) x", "λ(x:Top) x"),
        ("obj [m:inv Top] {m = self(s:[m:inv Top]) s}", "obj [m:inv Top] {m = ς(s:[m:inv Top]) s}"),
    ],
)
def test_ascii_aliases(ascii_src, unicode_src):
    assert parse_term(ascii_src) == parse_term(unicode_src)


def test_comments_are_ignored():
    assert parse_term("// lead\n(λ(x:Top) x) // mid\n (λ(y:Top) y)") == parse_term("(λ(x:Top) x) (λ(y:Top) y)")


def test_self_type_desugars_to_recursive_existential():
    bk = parse_type("Obj(X)[retrieve:inv X, backup:inv X]")
    d = desugar_self(bk)
    assert isinstance(d, Mu) and isinstance(d.body, Some)
    assert d.body.bound == TVar(d.var)
    assert alpha_eq(d, parse_type("Mu(Y) Some(X<:Y) [retrieve:inv X, backup:inv X]"))


def test_list_node_type_is_well_formed_after_desugaring():
    from impobj.typecheck import EMPTY, wf_type

    lst = desugar_self(parse_type("Obj(X)[hd:inv Top, tl:inv X]"))
    wf_type(EMPTY, lst)


def test_desugar_in_terms_reaches_annotations():
    t = desugar_self_in_term(parse_term("λ(l:Obj(X)[hd:inv Top, tl:inv X]) l"))
    assert isinstance(t.annot, Mu)


@pytest.mark.parametrize(
    "src",
    ["λ(x:Top", "obj [m:inv Top] {m = s}", "x.m := 3", "[m:wat Top]", "open x as <X, y:X> in y"],
)
def test_parse_errors(src):
    with pytest.raises(ParseError):
        parse_term(src)


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as e:
        parse_term("λ(x:Top")
    assert "1:8" in str(e.value)


def test_arrow_is_right_associative():
    assert print_type(parse_type("Top -> Top -> Top")) == "Top -> Top -> Top"
    assert print_type(parse_type("(Top -> Top) -> Top")) == "(Top -> Top) -> Top"


def test_alpha_equivalence():
    assert alpha_eq(parse_term("λ(x:Top) x"), parse_term("λ(y:Top) y"))
    assert not alpha_eq(parse_term("λ(x:Top) x"), parse_term("λ(x:Top) y"))
    assert alpha_eq(parse_type("Mu(X) [m:cov X]"), parse_type("Mu(Z) [m:cov Z]"))
    assert not alpha_eq(parse_type("[m:cov Top]"), parse_type("[m:con Top]"))


def test_substitution_avoids_capture():
    A = parse_type("All(Y<:Top) X -> Y")
    out = subst_type(A, "X", TVar("Y"))
    assert not alpha_eq(out, parse_type("All(Y<:Top) Y -> Y"))
    assert alpha_eq(out, parse_type("All(Z<:Top) Y -> Z"))


def test_free_variables():
    fv_terms, fv_types, _ = free_vars(parse_term("λ(x:X) x y"))
    assert fv_terms == {"y"} and fv_types == {"X"}


def test_erasure_replaces_annotations_by_top():
    t = parse_term("(λ(x:[m:inv Top]) x.m) (obj [m:inv Top] {m = ς(s:[m:inv Top]) s})")
    assert erase_annotations(t) == parse_term("(λ(x:Top) x.m) (obj Top {m = ς(s:Top) s})")


def test_json_dump_is_tagged():
    j = to_json(parse_term("obj [m:inv Top] {m = ς(s:[m:inv Top]) s}"))
    assert j["kind"] == "ObjNew"
    assert j["methods"][0]["name"] == "m"


def test_corpus_round_trip():
    for prog in load_corpus():
        t = prog.term()
        assert alpha_eq(parse_term(print_term(t)), t), prog.name


@given(universe_types)
def test_type_round_trip_universe(A):
    assert alpha_eq(parse_type(print_type(A)), A)


@given(closed_types)
def test_type_round_trip_generated(A):
    assert parse_type(print_type(A)) == A


@given(well_typed())
def test_term_round_trip_generated(prog):
    t, _ = prog
    assert alpha_eq(parse_term(print_term(t)), t)


def test_objects_keep_method_order():
    A = ObjV((("n", "inv", TOP), ("m", "cov", TOP)))
    assert print_type(A) == "[n:inv Top, m:cov Top]"
