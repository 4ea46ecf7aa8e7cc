"""Default sampling catalogs: closed values, heap-typing deltas, witness codes."""
from __future__ import annotations

from typing import Dict, Tuple

from ..syntax.ast import Type
from ..syntax.parser import parse_term, parse_type


def _ty(s: str) -> Type:
    return parse_type(s)


def _val(src: str, **delta: str):
    items = tuple(sorted((int(k[1:]), _ty(v)) for k, v in delta.items()))
    return items, parse_term(src)


# Values carry the heap-typing delta their locations need (l0, l1, ... are
# renumbered when the value is placed next to an existing heap typing).
VALUES = (
    _val("λ(x:Top) x"),
    _val("λ(x:Top) obj Top {}"),
    _val("λ(x:Top) x.m"),
    _val("λ(x:Top) λ(y:Top) x"),
    _val("λ(x:Top) (obj [w:inv Bot] {w = ς(s:[w:inv Bot]) s.w}).w"),
    _val("λ(x:[m:inv Top]) x.m"),
    _val("λ(x:Top) obj [p:inv Top] {p = ς(s:[p:inv Top]) s}"),
    _val("λ(x:Top) obj [q:inv Top] {q = ς(s:[q:inv Top]) obj Top {}}"),
    _val("Fun(X<:Top) λ(x:X) x"),
    _val("Fun(X<:Top) obj Top {}"),
    _val("fold[Mu(X) Top] λ(x:Top) x"),
    _val("fold[Mu(X) [m:cov X]] {}"),
    _val("pack<X<:Top=Top, λ(x:X) x : X -> X>"),
    _val("pack<X<:Top=[m:inv Top], λ(x:X) x.m : X -> Top>"),
    _val("{}"),
    _val("{m = l0}", l0="[m:inv Top] -> Top"),
    _val("{m = l0}", l0="[m:cov Top] -> Bot"),
    _val("{m = l0}", l0="[m:con Top] -> Top"),
    _val("{p = l0}", l0="[p:inv Top] -> Top"),
    _val("{q = l0}", l0="[q:inv Top] -> Top"),
    _val("{m = l0, n = l1}", l0="[m:inv Top, n:inv Top] -> Top", l1="[m:inv Top, n:inv Top] -> Top"),
    _val("{m = l0}", l0="Top"),
)

EXTENSIONS = (
    ((0, _ty("Top")),),
    ((0, _ty("Top -> Top")),),
    ((0, _ty("[m:inv Top] -> Top")),),
    ((0, _ty("Bot -> Top")), (1, _ty("[p:inv Top] -> [p:inv Top]"))),
)

WITNESSES = tuple(
    _ty(s)
    for s in (
        "Top",
        "Bot",
        "[]",
        "[m:inv Top]",
        "[m:cov Top]",
        "[m:con Top]",
        "[p:inv Top]",
        "[q:inv Top]",
        "[m:inv Top, n:inv Top]",
        "Top -> Top",
        "Bot -> Top",
        "Mu(X) [m:cov X]",
        "All(X<:Top) X -> X",
        "Some(X<:Top) X",
    )
)


def catalog_summary() -> Dict[str, int]:
    return {"values": len(VALUES), "extensions": len(EXTENSIONS), "witnesses": len(WITNESSES)}


def value_sources() -> Tuple[str, ...]:
    from ..syntax.pretty import print_term

    return tuple(print_term(v) for _, v in VALUES)
