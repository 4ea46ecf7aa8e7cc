"""Abstract syntax of types and terms.

All nodes are immutable.  Equality is structural (names matter); use
``alpha_eq`` from :mod:`impobj.syntax.binding` for equality up to renaming.
Object types and object literals keep their methods in insertion order but
are compared as unordered maps by ``alpha_eq``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Dict, Optional, Tuple

VARIANCES = ("inv", "cov", "con")

_FIELD_NAMES: Dict[type, Tuple[str, ...]] = {}


class Node:
    """Base of all AST nodes: structural equality with a cached hash."""

    def _key(self) -> tuple:
        cls = type(self)
        names = _FIELD_NAMES.get(cls)
        if names is None:
            names = tuple(f.name for f in dataclasses.fields(cls))
            _FIELD_NAMES[cls] = names
        d = self.__dict__
        return tuple(d[n] for n in names)

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        if hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_h", h)
        return h

    def __str__(self) -> str:
        from .pretty import show

        return show(self)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


class Type(Node):
    """Syntactic types.

    Every type constructor exposes a uniform traversal protocol so that
    generic operations (free variables, substitution, canonical forms) also
    work for type-like nodes defined outside this module:

    * ``children()``: the immediate sub-types;
    * ``binder``: the name of the variable bound by this node, if any;
    * ``scoped()``: per child, whether the binder scopes over it;
    * ``remake(binder, children)``: rebuild with new binder/children.
    """

    binder: ClassVar[Optional[str]] = None

    def children(self) -> Tuple["Type", ...]:
        return ()

    def scoped(self) -> Tuple[bool, ...]:
        return ()

    def remake(self, binder: Optional[str], kids: Tuple["Type", ...]) -> "Type":
        return self

    @cached_property
    def ftv(self) -> frozenset:
        """Free type variables."""
        out = set()
        b = self.binder
        for kid, sc in zip(self.children(), self.scoped()):
            f = kid.ftv
            if sc and b is not None and b in f:
                f = f - {b}
            out |= f
        return frozenset(out)

    @cached_property
    def size(self) -> int:
        return 1 + sum(k.size for k in self.children())


@dataclass(frozen=True, eq=False)
class TVar(Type):
    name: str

    @cached_property
    def ftv(self) -> frozenset:
        return frozenset((self.name,))


@dataclass(frozen=True, eq=False)
class Top(Type):
    pass


@dataclass(frozen=True, eq=False)
class Bot(Type):
    pass


TOP = Top()
BOT = Bot()


@dataclass(frozen=True, eq=False)
class Arrow(Type):
    dom: Type
    cod: Type

    def children(self):
        return (self.dom, self.cod)

    def scoped(self):
        return (False, False)

    def remake(self, binder, kids):
        return Arrow(kids[0], kids[1])


@dataclass(frozen=True, eq=False)
class ObjV(Type):
    """Variance-annotated object type; methods are (name, variance, type)."""

    methods: Tuple[Tuple[str, str, Type], ...]

    def children(self):
        return tuple(t for _, _, t in self.methods)

    def scoped(self):
        return (False,) * len(self.methods)

    def remake(self, binder, kids):
        return ObjV(tuple((n, v, k) for (n, v, _), k in zip(self.methods, kids)))

    def method(self, name: str):
        for n, v, t in self.methods:
            if n == name:
                return v, t
        return None

    @property
    def names(self) -> frozenset:
        return frozenset(n for n, _, _ in self.methods)


@dataclass(frozen=True, eq=False)
class ObjSplit(Type):
    """Split object type; methods are (name, write type, read type)."""

    methods: Tuple[Tuple[str, Type, Type], ...]

    def children(self):
        out = []
        for _, w, r in self.methods:
            out.extend((w, r))
        return tuple(out)

    def scoped(self):
        return (False,) * (2 * len(self.methods))

    def remake(self, binder, kids):
        return ObjSplit(tuple((n, kids[2 * i], kids[2 * i + 1]) for i, (n, _, _) in enumerate(self.methods)))

    def method(self, name: str):
        for n, w, r in self.methods:
            if n == name:
                return w, r
        return None

    @property
    def names(self) -> frozenset:
        return frozenset(n for n, _, _ in self.methods)


@dataclass(frozen=True, eq=False)
class Mu(Type):
    var: str
    body: Type

    @property
    def binder(self):
        return self.var

    def children(self):
        return (self.body,)

    def scoped(self):
        return (True,)

    def remake(self, binder, kids):
        return Mu(binder, kids[0])


@dataclass(frozen=True, eq=False)
class All(Type):
    var: str
    bound: Type
    body: Type

    @property
    def binder(self):
        return self.var

    def children(self):
        return (self.bound, self.body)

    def scoped(self):
        return (False, True)

    def remake(self, binder, kids):
        return All(binder, kids[0], kids[1])


@dataclass(frozen=True, eq=False)
class Some(Type):
    var: str
    bound: Type
    body: Type

    @property
    def binder(self):
        return self.var

    def children(self):
        return (self.bound, self.body)

    def scoped(self):
        return (False, True)

    def remake(self, binder, kids):
        return Some(binder, kids[0], kids[1])


@dataclass(frozen=True, eq=False)
class SelfObj(Type):
    """Self type ``Obj(X)[...]``: X names the type of the host object."""

    var: str
    methods: Tuple[Tuple[str, str, Type], ...]

    @property
    def binder(self):
        return self.var

    def children(self):
        return tuple(t for _, _, t in self.methods)

    def scoped(self):
        return (True,) * len(self.methods)

    def remake(self, binder, kids):
        return SelfObj(binder, tuple((n, v, k) for (n, v, _), k in zip(self.methods, kids)))

    @property
    def names(self) -> frozenset:
        return frozenset(n for n, _, _ in self.methods)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class Term(Node):
    @cached_property
    def fv(self) -> Tuple[frozenset, frozenset, frozenset]:
        from .binding import _term_fv

        return _term_fv(self)


@dataclass(frozen=True, eq=False)
class Var(Term):
    name: str


@dataclass(frozen=True, eq=False)
class ObjNew(Term):
    """Object literal; methods are (name, self variable, self annotation, body)."""

    annot: Type
    methods: Tuple[Tuple[str, str, Type, Term], ...]


@dataclass(frozen=True, eq=False)
class Invoke(Term):
    recv: Term
    method: str


@dataclass(frozen=True, eq=False)
class Update(Term):
    recv: Term
    method: str
    self_var: str
    self_annot: Type
    body: Term


@dataclass(frozen=True, eq=False)
class Clone(Term):
    arg: Term


@dataclass(frozen=True, eq=False)
class Lam(Term):
    var: str
    annot: Type
    body: Term


@dataclass(frozen=True, eq=False)
class App(Term):
    fun: Term
    arg: Term


@dataclass(frozen=True, eq=False)
class Fold(Term):
    annot: Type
    arg: Term


@dataclass(frozen=True, eq=False)
class Unfold(Term):
    annot: Type
    arg: Term


@dataclass(frozen=True, eq=False)
class TLam(Term):
    tvar: str
    bound: Type
    body: Term


@dataclass(frozen=True, eq=False)
class TApp(Term):
    fun: Term
    targ: Type


@dataclass(frozen=True, eq=False)
class Pack(Term):
    """``pack<X<:bound=witness, payload : body_type>``; X scopes over payload and body_type."""

    tvar: str
    bound: Type
    witness: Type
    payload: Term
    body_type: Type


@dataclass(frozen=True, eq=False)
class Open(Term):
    """``open arg as <X<:bound, x:var_type> in body : result_type``."""

    arg: Term
    tvar: str
    bound: Type
    var: str
    var_type: Type
    body: Term
    result_type: Type


@dataclass(frozen=True, eq=False)
class RuntimeObj(Term):
    """Run-time object: method names mapped to heap locations (ints)."""

    locs: Tuple[Tuple[str, int], ...]

    def loc(self, name: str) -> Optional[int]:
        for n, l in self.locs:
            if n == name:
                return l
        return None


def is_value(t: Term) -> bool:
    """Value grammar: run-time objects, procedures, folds, type abstractions, packs of values."""
    while True:
        if isinstance(t, (RuntimeObj, Lam, TLam)):
            return True
        if isinstance(t, Fold):
            t = t.arg
        elif isinstance(t, Pack):
            t = t.payload
        else:
            return False


def loc_name(l: int) -> str:
    return f"l{l}"
