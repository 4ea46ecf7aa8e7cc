"""Typing contexts and well-formedness."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from ..syntax.ast import Type


@dataclass(frozen=True)
class TermBind:
    name: str
    type: Type


@dataclass(frozen=True)
class TypeBind:
    name: str
    bound: Type


class Context:
    """An immutable list of bindings, innermost last."""

    __slots__ = ("binds", "_tnames", "_ynames")

    def __init__(self, binds: Iterable = ()):
        self.binds: Tuple = tuple(binds)
        self._tnames = frozenset(b.name for b in self.binds if isinstance(b, TermBind))
        self._ynames = frozenset(b.name for b in self.binds if isinstance(b, TypeBind))

    def __repr__(self) -> str:
        parts = []
        for b in self.binds:
            if isinstance(b, TermBind):
                parts.append(f"{b.name}:{b.type}")
            else:
                parts.append(f"{b.name}<:{b.bound}")
        return "[" + ", ".join(parts) + "]"

    def __len__(self) -> int:
        return len(self.binds)

    @property
    def term_names(self) -> frozenset:
        return self._tnames

    @property
    def type_names(self) -> frozenset:
        return self._ynames

    def add_term(self, x: str, A: Type) -> "Context":
        return Context(self.binds + (TermBind(x, A),))

    def add_type(self, X: str, bound: Type) -> "Context":
        return Context(self.binds + (TypeBind(X, bound),))

    def term_type(self, x: str) -> Optional[Type]:
        for b in reversed(self.binds):
            if isinstance(b, TermBind) and b.name == x:
                return b.type
        return None

    def bound(self, X: str) -> Optional[Type]:
        for b in reversed(self.binds):
            if isinstance(b, TypeBind) and b.name == X:
                return b.bound
        return None

    def key(self) -> tuple:
        return tuple((type(b).__name__, b.name, getattr(b, "type", None) or getattr(b, "bound", None)) for b in self.binds)


EMPTY = Context()


def wf_type(ctx: Context, A: Type) -> bool:
    """All free type variables of A are bound in ctx."""
    return A.ftv <= ctx.type_names


def wf_context(ctx: Context) -> bool:
    """No duplicate names and each binding well-formed w.r.t. its prefix."""
    seen_t, seen_y = set(), set()
    prefix = Context()
    for b in ctx.binds:
        if isinstance(b, TermBind):
            if b.name in seen_t or not wf_type(prefix, b.type):
                return False
            seen_t.add(b.name)
            prefix = prefix.add_term(b.name, b.type)
        else:
            if b.name in seen_y or not wf_type(prefix, b.bound):
                return False
            seen_y.add(b.name)
            prefix = prefix.add_type(b.name, b.bound)
    return True
