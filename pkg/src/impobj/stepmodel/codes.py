"""Type codes: closed syntactic types standing for semantic types.

Besides the ordinary type constructors, codes may use a few forms that have
no surface syntax:

* ``Approx(body, ceiling)`` is the approximation ``⌊body⌋_ceiling``;
* ``Ref(variance, payload)`` and ``RefSplit(write, read)`` are reference
  types, whose members are locations (``LocVal``);
* ``RecRec(var, fields)`` is the recursive record type whose members are
  exactly the objects whose methods fit ``var -> F_d(var)`` with ``var``
  the record type itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

from ..syntax.ast import (
    BOT,
    TOP,
    Arrow,
    ObjSplit,
    ObjV,
    SelfObj,
    Type,
)
from ..syntax.binding import canon_type, desugar_self, subst_type, subst_types
from ..syntax.pretty import print_type


@dataclass(frozen=True, eq=False)
class Approx(Type):
    body: Type
    ceiling: int

    def children(self):
        return (self.body,)

    def scoped(self):
        return (False,)

    def remake(self, binder, kids):
        return Approx(kids[0], self.ceiling)

    def render(self, pr, sc):
        return f"⌊{pr(self.body)}⌋_{self.ceiling}"


@dataclass(frozen=True, eq=False)
class Ref(Type):
    variance: str
    payload: Type

    def children(self):
        return (self.payload,)

    def scoped(self):
        return (False,)

    def remake(self, binder, kids):
        return Ref(self.variance, kids[0])

    def render(self, pr, sc):
        return f"ref{self.variance}({pr(self.payload)})"


@dataclass(frozen=True, eq=False)
class RefSplit(Type):
    write: Type
    read: Type

    def children(self):
        return (self.write, self.read)

    def scoped(self):
        return (False, False)

    def remake(self, binder, kids):
        return RefSplit(kids[0], kids[1])

    def render(self, pr, sc):
        return f"ref({pr(self.write)}, {pr(self.read)})"


@dataclass(frozen=True, eq=False)
class RecRec(Type):
    """Recursive record type; ``fields`` are (name, variance, body) sorted by name."""

    var: str
    fields: Tuple[Tuple[str, str, Type], ...]

    @property
    def binder(self):
        return self.var

    def children(self):
        return tuple(t for _, _, t in self.fields)

    def scoped(self):
        return (True,) * len(self.fields)

    def remake(self, binder, kids):
        return RecRec(binder, tuple((n, v, k) for (n, v, _), k in zip(self.fields, kids)))

    @property
    def names(self) -> frozenset:
        return frozenset(n for n, _, _ in self.fields)

    def render(self, pr, sc):
        x, info = sc.bind(self.var, "X")
        s = f"Rec({x})[" + ", ".join(f"{n}:{v} {pr(t)}" for n, v, t in self.fields) + "]"
        sc.unbind(info)
        return s


@dataclass(frozen=True)
class LocVal:
    """A bare location, the kind of value that inhabits reference types."""

    loc: int

    def __str__(self) -> str:
        return f"l{self.loc}"


def rec_record(self_type: SelfObj) -> RecRec:
    """The recursive record type built from the methods of a self type."""
    return RecRec(self_type.var, tuple(sorted(self_type.methods, key=lambda m: m[0])))


def ref_bounds(r: Type) -> Tuple[Type, Type]:
    """Write and read components of a reference code."""
    if isinstance(r, RefSplit):
        return r.write, r.read
    v, p = r.variance, r.payload
    if v == "inv":
        return p, p
    if v == "cov":
        return BOT, p
    return p, TOP


def ceiling(c: Type) -> Optional[int]:
    """Effective outer ceiling; None stands for no approximation."""
    out = None
    while isinstance(c, Approx):
        out = c.ceiling if out is None else min(out, c.ceiling)
        c = c.body
    return out


def strip(c: Type) -> Type:
    while isinstance(c, Approx):
        c = c.body
    return c


def approx_code(c: Type, k: Optional[int]) -> Type:
    """``⌊c⌋_k``; nested ceilings collapse to their minimum."""
    if k is None:
        return c
    old = ceiling(c)
    if old is not None and old <= k:
        return c
    return Approx(strip(c), k if old is None else min(old, k))


def unroll(m) -> Type:
    return subst_type(m.body, m.var, m)


def self_body(c, name: str, arg: Type) -> Tuple[str, Type]:
    """Variance and ``F_name(arg)`` of a self type or recursive record."""
    for n, v, t in (c.methods if isinstance(c, SelfObj) else c.fields):
        if n == name:
            return v, subst_type(t, c.var, arg)
    raise KeyError(name)


def method_ref(c: Type, name: str, w: Type) -> Optional[Tuple[Type, Type]]:
    """Lower and upper procedure codes for method ``name`` of object code ``c``.

    A location ``l`` fits the method when ``lower ⊆ Ψ(l) ⊆ upper``, with
    ``w`` the existential self type.  None when the method is absent.
    """
    if isinstance(c, ObjSplit):
        m = c.method(name)
        return None if m is None else (Arrow(w, m[0]), Arrow(w, m[1]))
    if isinstance(c, ObjV):
        m = c.method(name)
        if m is None:
            return None
        v, t = m
    elif isinstance(c, (SelfObj, RecRec)):
        if name not in c.names:
            return None
        v, t = self_body(c, name, w)
    else:
        return None
    p = Arrow(w, t)
    return {"inv": (p, p), "cov": (BOT, p), "con": (p, TOP)}[v]


def object_names(c: Type) -> frozenset:
    return c.names


OBJECT_CODES = (ObjV, ObjSplit, SelfObj, RecRec)


def is_object_code(c: Type) -> bool:
    return isinstance(strip(c), OBJECT_CODES)


class UnboundTypeVariable(ValueError):
    pass


def interp(A: Type, eta: Optional[Mapping[str, Type]] = None, self_types: str = "desugar") -> Type:
    """The code denoting the meaning of ``A`` under ``eta``.

    Type variables are replaced by their codes; binders (recursive,
    quantified and self types) stay in place and are unfolded lazily by the
    membership checks.  With ``self_types="desugar"`` self types become the
    recursive existential encoding used by the type checker; ``"direct"``
    keeps them as self-type codes.
    """
    eta = dict(eta or {})
    missing = A.ftv - eta.keys()
    if missing:
        raise UnboundTypeVariable(f"unbound type variable(s): {', '.join(sorted(missing))}")
    if self_types == "desugar":
        A = desugar_self(A)
    elif self_types != "direct":
        raise ValueError(f"self_types must be 'desugar' or 'direct', not {self_types!r}")
    return subst_types(A, eta)


def approx_env(eta: Mapping[str, Type], k: int) -> dict:
    return {x: approx_code(c, k) for x, c in eta.items()}


def show_code(c) -> str:
    if isinstance(c, Type):
        return print_type(c)
    return str(c)


def code_key(c: Type) -> Type:
    return canon_type(c)


__all__ = [
    "Approx",
    "LocVal",
    "OBJECT_CODES",
    "RecRec",
    "Ref",
    "RefSplit",
    "UnboundTypeVariable",
    "approx_code",
    "approx_env",
    "ceiling",
    "interp",
    "is_object_code",
    "method_ref",
    "rec_record",
    "ref_bounds",
    "self_body",
    "show_code",
    "strip",
    "unroll",
]
