"""Three-valued verdicts, heap typings and sampling budgets."""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from ..syntax.ast import Term, Type
from ..syntax.pretty import print_term
from .codes import LocVal, approx_code, show_code

HOLDS = "Holds"
COUNTEREXAMPLE = "Counterexample"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    """``detail`` holds statistics, a witness record or a reason, by kind."""

    kind: str
    detail: Any = None
    call: Optional[Tuple[str, tuple]] = field(default=None, compare=False)

    @property
    def holds(self) -> bool:
        return self.kind == HOLDS

    @property
    def is_counterexample(self) -> bool:
        return self.kind == COUNTEREXAMPLE

    @property
    def inconclusive(self) -> bool:
        return self.kind == INCONCLUSIVE

    def with_call(self, name: str, args: tuple, stats: Optional[dict] = None) -> "Verdict":
        detail = self.detail
        if self.kind == HOLDS and stats is not None:
            detail = stats
        return Verdict(self.kind, detail, (name, args))

    def to_json(self) -> dict:
        out: Dict[str, Any] = {"verdict": self.kind}
        if self.kind == HOLDS:
            out["checked"] = self.detail or {}
        elif self.kind == COUNTEREXAMPLE:
            out["witness"] = jsonable(self.detail)
        else:
            out["reason"] = self.detail
        if self.call is not None:
            out["call"] = {"op": self.call[0], "args": [jsonable(a) for a in self.call[1]]}
        return out

    def __str__(self) -> str:
        if self.kind == COUNTEREXAMPLE:
            return f"Counterexample({describe(self.detail)})"
        if self.kind == INCONCLUSIVE:
            return f"Inconclusive({self.detail})"
        return "Holds"


H = Verdict(HOLDS)


def ce(why: str, cause: Optional[Verdict] = None, **at) -> Verdict:
    w: Dict[str, Any] = {"why": why}
    if at:
        w["at"] = at
    if cause is not None and cause.kind == COUNTEREXAMPLE:
        w["cause"] = cause.detail
    return Verdict(COUNTEREXAMPLE, w)


def inconclusive(reason: str) -> Verdict:
    return Verdict(INCONCLUSIVE, reason)


def describe(w) -> str:
    parts = []
    while isinstance(w, dict):
        parts.append(w.get("why", "?"))
        w = w.get("cause")
    return " <- ".join(parts)


def jsonable(x):
    if isinstance(x, Verdict):
        return x.to_json()
    if isinstance(x, Psi):
        return {f"l{l}": show_code(c) for l, c in x.items}
    if isinstance(x, Type):
        return show_code(x)
    if isinstance(x, Term):
        return print_term(x)
    if isinstance(x, LocVal):
        return str(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# Heap typings
# ---------------------------------------------------------------------------


class Psi:
    """Immutable finite heap typing: location -> code."""

    __slots__ = ("items", "map", "_hash", "_approx")

    def __init__(self, mapping: Optional[Mapping[int, Type]] = None):
        items = tuple(sorted((mapping or {}).items()))
        self.items = items
        self.map = dict(items)
        self._hash = hash(items)
        self._approx: Dict[int, "Psi"] = {}

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Psi) and self.items == other.items

    def __contains__(self, l) -> bool:
        return l in self.map

    def __getitem__(self, l) -> Type:
        return self.map[l]

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.map)

    @property
    def dom(self) -> frozenset:
        return frozenset(self.map)

    def next_loc(self) -> int:
        return self.items[-1][0] + 1 if self.items else 0

    def approx(self, k: int) -> "Psi":
        p = self._approx.get(k)
        if p is None:
            p = Psi({l: approx_code(c, k) for l, c in self.items})
            self._approx[k] = p
        return p

    def extend(self, delta: Mapping[int, Type]) -> "Psi":
        if not delta:
            return self
        m = dict(self.map)
        m.update(delta)
        return Psi(m)

    def __repr__(self) -> str:
        return "Psi{" + ", ".join(f"l{l}: {show_code(c)}" for l, c in self.items) + "}"


EMPTY_PSI = Psi()


# ---------------------------------------------------------------------------
# Budgets
# ---------------------------------------------------------------------------

Inhabitant = Tuple[Tuple[Tuple[int, Type], ...], object]  # (delta items, value)


@dataclass(frozen=True)
class Budget:
    """Finite stand-ins for the unbounded quantifiers.

    ``values`` pairs each closed value with the heap-typing delta it needs
    (locations numbered from 0 and relocated on use); ``extensions`` are
    heap-typing deltas used to sample state extensions; ``witnesses`` are
    candidate codes for existentially quantified types; ``samples`` caps the
    number of instances drawn per quantifier.
    """

    k_max: int = 5
    values: Tuple[Inhabitant, ...] = ()
    extensions: Tuple[Tuple[Tuple[int, Type], ...], ...] = ()
    witnesses: Tuple[Type, ...] = ()
    samples: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.k_max < 0:
            raise ValueError("k_max must be non-negative")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if not self.values or not self.extensions or not self.witnesses:
            from . import catalog

            if not self.values:
                object.__setattr__(self, "values", catalog.VALUES)
            if not self.extensions:
                object.__setattr__(self, "extensions", catalog.EXTENSIONS)
            if not self.witnesses:
                object.__setattr__(self, "witnesses", catalog.WITNESSES)

    def stream(self, *salt) -> int:
        """A stable per-purpose seed (independent of Python's hash randomization)."""
        text = repr((self.seed,) + tuple(_stable(s) for s in salt))
        return zlib.crc32(text.encode())

    def describe(self) -> dict:
        return {
            "k_max": self.k_max,
            "values": len(self.values),
            "extensions": len(self.extensions),
            "witnesses": len(self.witnesses),
            "samples": self.samples,
            "seed": self.seed,
        }


def _stable(x) -> str:
    if isinstance(x, (Type, Term)):
        return jsonable(x)
    if isinstance(x, Psi):
        return repr(x)
    return repr(x)
