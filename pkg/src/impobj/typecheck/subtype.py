"""Algorithmic subtyping.

Reflexivity is alpha-equivalence, transitivity is built in through bound
promotion of type variables, and object types use one combined rule for
width, depth and variance weakening.  Recursive types follow the Amber rule:
the bodies are compared under fresh assumptions ``Y <: Top, X <: Y``.
Quantifier rules are the full (possibly non-terminating) ones, so every call
runs under a fuel budget and may answer Unknown.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..syntax.ast import All, Arrow, Bot, Mu, ObjSplit, ObjV, Some, Top, TVar, Type
from ..syntax.binding import canon_type, desugar_self, fresh, subst_type
from .context import EMPTY, Context

DEFAULT_FUEL = 10_000

VARIANCE = "variance"
SPLIT = "split"
MODES = (VARIANCE, SPLIT)


class OutOfFuel(Exception):
    pass


@dataclass
class Fuel:
    left: int

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise OutOfFuel()


@dataclass(frozen=True)
class Rules:
    """Which rule variant to use; ``mutation`` names a deliberately broken rule."""

    mode: str = VARIANCE
    mutation: Optional[str] = None


class SubtypeResult:
    """Yes, No (with the failing premise chain) or Unknown (fuel exhausted)."""

    __slots__ = ("verdict", "_fail", "_expl")

    def __init__(self, verdict: str, explanation=None, fail=None):
        self.verdict = verdict  # "yes" | "no" | "unknown"
        self._fail = fail
        self._expl = explanation

    @property
    def explanation(self) -> List[str]:
        if self._expl is None:
            self._expl = explain(self._fail)
        return self._expl

    @property
    def yes(self) -> bool:
        return self.verdict == "yes"

    def __repr__(self) -> str:
        return f"SubtypeResult({self.verdict!r})"

    def __str__(self) -> str:
        head = {"yes": "Yes", "no": "No", "unknown": "Unknown"}[self.verdict]
        if self.explanation:
            return head + "\n" + "\n".join("  " * i + "- " + e for i, e in enumerate(self.explanation))
        return head


# A failure is a nested tuple (message, inner failure or None), built lazily.
Fail = Tuple


def _fail(msg_fn, inner=None) -> Fail:
    return (msg_fn, inner)


def explain(f: Optional[Fail]) -> List[str]:
    out = []
    while f is not None:
        m, f = f
        out.append(m() if callable(m) else m)
    return out


def _unify_binders(a: str, A: Type, b: str, B: Type, taken) -> Tuple[str, Type, Type]:
    """Rename the binders of two scoped bodies to one shared name not in ``taken``."""
    if a not in taken and (a == b or a not in B.ftv):
        z = a
    else:
        z = fresh(a, set(taken) | A.ftv | B.ftv | {a, b})
    return z, (A if z == a else subst_type(A, a, TVar(z))), (B if z == b else subst_type(B, b, TVar(z)))


def _sub(ctx: Context, A: Type, B: Type, fuel: Fuel, rules: Rules) -> Optional[Fail]:
    fuel.tick()
    ta, tb = type(A), type(B)
    if A is B or tb is Top or ta is Bot:
        return None
    if ta is TVar:
        if tb is TVar and A.name == B.name:
            return None
        bound = ctx.bound(A.name)
        if bound is None:
            return _fail(f"SubVar: type variable {A.name} is not in scope")
        r = _sub(ctx, bound, B, fuel, rules)
        if r is not None:
            return _fail(lambda: f"SubVar: bound of {A.name} is {bound}, not a subtype of {B}", r)
        return None
    if ta is not tb:
        return _fail(lambda: f"no rule relates {A} and {B}")
    if canon_type(A) == canon_type(B):
        return None
    if ta is Arrow:
        r = _sub(ctx, B.dom, A.dom, fuel, rules)
        if r is not None:
            return _fail(lambda: f"SubProc: domain {B.dom} is not a subtype of {A.dom}", r)
        r = _sub(ctx, A.cod, B.cod, fuel, rules)
        if r is not None:
            return _fail(lambda: f"SubProc: codomain {A.cod} is not a subtype of {B.cod}", r)
        return None
    if ta is ObjV:
        if rules.mode == SPLIT:
            return _fail(lambda: f"variance object type {A} in split mode")
        return _sub_obj(ctx, A, B, fuel, rules)
    if ta is ObjSplit:
        if rules.mode != SPLIT:
            return _fail(lambda: f"split object type {A} in variance mode")
        return _sub_split(ctx, A, B, fuel, rules)
    if ta is Mu:
        avoid = ctx.type_names | A.ftv | B.ftv
        y = fresh("Y", avoid)
        x = fresh("X", avoid | {y})
        inner = ctx.add_type(y, Top()).add_type(x, TVar(y))
        r = _sub(inner, subst_type(A.body, A.var, TVar(x)), subst_type(B.body, B.var, TVar(y)), fuel, rules)
        if r is not None:
            return _fail(lambda: f"SubRec: bodies of {A} and {B} unrelated under {x} <: {y}", r)
        return None
    if ta is All or ta is Some:
        name = "SubUniv" if ta is All else "SubExist"
        if ta is All:
            r = _sub(ctx, B.bound, A.bound, fuel, rules)
            if r is not None:
                return _fail(lambda: f"{name}: bound {B.bound} is not a subtype of {A.bound}", r)
            bound = B.bound
        else:
            r = _sub(ctx, A.bound, B.bound, fuel, rules)
            if r is not None:
                return _fail(lambda: f"{name}: bound {A.bound} is not a subtype of {B.bound}", r)
            bound = A.bound
        z, ba, bb = _unify_binders(A.var, A.body, B.var, B.body, ctx.type_names)
        r = _sub(ctx.add_type(z, bound), ba, bb, fuel, rules)
        if r is not None:
            return _fail(lambda: f"{name}: bodies unrelated under {z} <: {bound}", r)
        return None
    return _fail(lambda: f"no rule relates {A} and {B}")


def _sub_obj(ctx, A: ObjV, B: ObjV, fuel, rules) -> Optional[Fail]:
    mine = {n: (v, t) for n, v, t in A.methods}
    if rules.mutation == "width-reversed-subobj":
        theirs = {n for n, _, _ in B.methods}
        extra = [n for n in mine if n not in theirs]
        if extra:
            return _fail(f"SubObj (reversed width): method {extra[0]} not in the supertype")
    for n, vb, tb in B.methods:
        got = mine.get(n)
        if got is None:
            if rules.mutation == "width-reversed-subobj":
                continue
            return _fail(lambda: f"SubObj: method {n} missing from {A}")
        va, ta = got
        if not (va == "inv" or va == vb):
            return _fail(lambda: f"SubObjVar: method {n} is {va} in {A} but {vb} in {B}")
        if vb in ("cov", "inv"):
            r = _sub(ctx, ta, tb, fuel, rules)
            if r is not None:
                return _fail(lambda: f"SubObj: method {n} ({vb}) needs {ta} <: {tb}", r)
        if vb in ("con", "inv"):
            r = _sub(ctx, tb, ta, fuel, rules)
            if r is not None:
                return _fail(lambda: f"SubObj: method {n} ({vb}) needs {tb} <: {ta}", r)
    return None


def _sub_split(ctx, A: ObjSplit, B: ObjSplit, fuel, rules) -> Optional[Fail]:
    mine = {n: (w, r) for n, w, r in A.methods}
    for n, wb, rb in B.methods:
        got = mine.get(n)
        if got is None:
            return _fail(lambda: f"SubObj-Gen: method {n} missing from {A}")
        wa, ra = got
        r = _sub(ctx, wb, wa, fuel, rules)
        if r is not None:
            return _fail(lambda: f"SubObj-Gen: write type of {n}: {wb} is not a subtype of {wa}", r)
        r = _sub(ctx, ra, rb, fuel, rules)
        if r is not None:
            return _fail(lambda: f"SubObj-Gen: read type of {n}: {ra} is not a subtype of {rb}", r)
    return None


def subtype(
    ctx: Context,
    A: Type,
    B: Type,
    fuel: int = DEFAULT_FUEL,
    mode: str = VARIANCE,
    mutation: Optional[str] = None,
) -> SubtypeResult:
    """Decide ``ctx ⊢ A <: B``.  In split mode both sides are encoded first."""
    from .encode import encode_to_split

    ctx = ctx if ctx is not None else EMPTY
    if mode == SPLIT:
        A, B = encode_to_split(A, strict=False), encode_to_split(B, strict=False)
    else:
        A, B = desugar_self(A), desugar_self(B)
    return subtype_fuel(ctx, A, B, Fuel(fuel), Rules(mode, mutation))


def subtype_fuel(ctx: Context, A: Type, B: Type, fuel: Fuel, rules: Rules) -> SubtypeResult:
    """Subtyping on already prepared types with a shared fuel counter."""
    try:
        r = _sub(ctx, A, B, fuel, rules)
    except OutOfFuel:
        return SubtypeResult("unknown", ["fuel exhausted"])
    except RecursionError:
        return SubtypeResult("unknown", ["recursion depth exhausted"])
    if r is None:
        return SubtypeResult("yes")
    return SubtypeResult("no", fail=r)


def is_subtype(A: Type, B: Type, ctx: Context = EMPTY, fuel: int = DEFAULT_FUEL, mode: str = VARIANCE) -> bool:
    return subtype(ctx, A, B, fuel, mode).yes


__all__ = [
    "DEFAULT_FUEL",
    "Fuel",
    "MODES",
    "OutOfFuel",
    "Rules",
    "SPLIT",
    "SubtypeResult",
    "VARIANCE",
    "explain",
    "is_subtype",
    "subtype",
    "subtype_fuel",
]
