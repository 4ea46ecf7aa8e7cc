"""Heap-based small-step evaluation.

Left-to-right call-by-value with a unique redex per closed term.  Heaps map
integer locations to closed procedures and are never mutated in place: every
heap-changing step returns a fresh dict.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .syntax.ast import (
    App,
    Clone,
    Fold,
    Invoke,
    Lam,
    ObjNew,
    Open,
    Pack,
    RuntimeObj,
    TApp,
    Term,
    TLam,
    Unfold,
    Update,
    Var,
    is_value,
    loc_name,
)
from .syntax.binding import alpha_eq, subst, subst_type_in_term
from .syntax.pretty import print_term

Heap = Mapping[int, Term]

RULES = ("Red-Obj", "Red-Inv", "Red-Upd", "Red-Clone", "Red-Beta", "Red-Unfold", "Red-TBeta", "Red-Open")

STUCK_REASONS = (
    "invoke-on-non-object",
    "missing-method",
    "update-on-non-object",
    "clone-non-object",
    "apply-non-lambda",
    "unfold-non-fold",
    "type-apply-non-tlam",
    "open-non-pack",
    "dangling-location",
    "free-variable",
)


@dataclass(frozen=True)
class Config:
    heap: Heap
    term: Term

    def show(self) -> str:
        return f"heap={show_heap(self.heap)} term={print_term(self.term)}"


def show_heap(h: Heap) -> str:
    return "{" + ", ".join(f"{loc_name(l)} ↦ {print_term(h[l])}" for l in sorted(h)) + "}"


# ---------------------------------------------------------------------------
# Allocators
# ---------------------------------------------------------------------------


class CanonicalAllocator:
    """Numbers new locations after the largest one in use."""

    name = "canonical"

    def fresh(self, heap: Heap, n: int) -> List[int]:
        start = max(heap) + 1 if heap else 0
        return list(range(start, start + n))


class RandomAllocator:
    """Picks fresh locations pseudo-randomly from a large range."""

    def __init__(self, seed: int, span: int = 1_000_000):
        self.seed = seed
        self.rng = random.Random(seed)
        self.span = span
        self.name = f"random:{seed}"

    def fresh(self, heap: Heap, n: int) -> List[int]:
        out: List[int] = []
        while len(out) < n:
            l = self.rng.randrange(self.span)
            if l not in heap and l not in out:
                out.append(l)
        return out


def make_allocator(spec: str):
    """``canonical`` or ``random:SEED``."""
    if spec == "canonical":
        return CanonicalAllocator()
    if spec.startswith("random:"):
        return RandomAllocator(int(spec.split(":", 1)[1]))
    raise ValueError(f"unknown allocator {spec!r}")


# ---------------------------------------------------------------------------
# Evaluation contexts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    """One layer of an evaluation context; ``hole`` marks where [·] sits."""

    node: Term
    hole: str  # field name of node holding the hole

    def plug(self, t: Term) -> Term:
        n = self.node
        d = {f: getattr(n, f) for f in n.__dataclass_fields__}
        d[self.hole] = t
        return type(n)(**d)


EvalContext = Tuple[Frame, ...]  # outermost frame first


def plug(ctx: EvalContext, t: Term) -> Term:
    for fr in reversed(ctx):
        t = fr.plug(t)
    return t


def show_context(ctx: EvalContext) -> str:
    return print_term(plug(ctx, Var("[·]")))


@dataclass(frozen=True)
class ValueForm:
    value: Term


@dataclass(frozen=True)
class RedexInContext:
    ctx: EvalContext
    redex: Term


@dataclass(frozen=True)
class StuckForm:
    reason: str
    ctx: EvalContext = ()
    term: Optional[Term] = None


Decomposition = Union[ValueForm, RedexInContext, StuckForm]


def decompose(t: Term) -> Decomposition:
    """Split a closed term into evaluation context and redex."""
    ctx: List[Frame] = []
    while True:
        if is_value(t):
            if not ctx:
                return ValueForm(t)
            raise AssertionError("decompose descended into a value")  # pragma: no cover
        if isinstance(t, Var):
            return StuckForm("free-variable", tuple(ctx), t)
        if isinstance(t, ObjNew):
            return RedexInContext(tuple(ctx), t)
        if isinstance(t, (Invoke, Update, Clone)):
            sub = t.recv if not isinstance(t, Clone) else t.arg
            if not is_value(sub):
                ctx.append(Frame(t, "arg" if isinstance(t, Clone) else "recv"))
                t = sub
                continue
            if not isinstance(sub, RuntimeObj):
                reason = {Invoke: "invoke-on-non-object", Update: "update-on-non-object", Clone: "clone-non-object"}[type(t)]
                return StuckForm(reason, tuple(ctx), t)
            if not isinstance(t, Clone) and sub.loc(t.method) is None:
                return StuckForm("missing-method", tuple(ctx), t)
            return RedexInContext(tuple(ctx), t)
        if isinstance(t, App):
            if not is_value(t.fun):
                ctx.append(Frame(t, "fun"))
                t = t.fun
                continue
            if not is_value(t.arg):
                ctx.append(Frame(t, "arg"))
                t = t.arg
                continue
            if isinstance(t.fun, Lam):
                return RedexInContext(tuple(ctx), t)
            return StuckForm("apply-non-lambda", tuple(ctx), t)
        if isinstance(t, Fold):
            ctx.append(Frame(t, "arg"))
            t = t.arg
            continue
        if isinstance(t, Unfold):
            if not is_value(t.arg):
                ctx.append(Frame(t, "arg"))
                t = t.arg
                continue
            if isinstance(t.arg, Fold):
                return RedexInContext(tuple(ctx), t)
            return StuckForm("unfold-non-fold", tuple(ctx), t)
        if isinstance(t, TApp):
            if not is_value(t.fun):
                ctx.append(Frame(t, "fun"))
                t = t.fun
                continue
            if isinstance(t.fun, TLam):
                return RedexInContext(tuple(ctx), t)
            return StuckForm("type-apply-non-tlam", tuple(ctx), t)
        if isinstance(t, Pack):
            ctx.append(Frame(t, "payload"))
            t = t.payload
            continue
        if isinstance(t, Open):
            if not is_value(t.arg):
                ctx.append(Frame(t, "arg"))
                t = t.arg
                continue
            if isinstance(t.arg, Pack):
                return RedexInContext(tuple(ctx), t)
            return StuckForm("open-non-pack", tuple(ctx), t)
        raise TypeError(f"unknown term {t!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# One step
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Stepped:
    config: Config
    rule: str
    allocated: Tuple[int, ...] = ()
    redex: Optional[Term] = None


@dataclass(frozen=True)
class Irreducible:
    kind: str  # "value" or "stuck"
    reason: Optional[str] = None


def contract(heap: Heap, redex: Term, alloc) -> Union[Tuple[Dict[int, Term], Term, str, Tuple[int, ...]], str]:
    """Apply the matching reduction rule; returns a stuck reason on failure."""
    if isinstance(redex, ObjNew):
        names = sorted(n for n, _, _, _ in redex.methods)
        locs = alloc.fresh(heap, len(names))
        where = dict(zip(names, locs))
        h = dict(heap)
        for n, x, A, b in redex.methods:
            h[where[n]] = Lam(x, A, b)
        obj = RuntimeObj(tuple((n, where[n]) for n, _, _, _ in redex.methods))
        return h, obj, "Red-Obj", tuple(locs)
    if isinstance(redex, Invoke):
        o = redex.recv
        l = o.loc(redex.method)
        if l not in heap:
            return "dangling-location"
        return heap, App(heap[l], o), "Red-Inv", ()
    if isinstance(redex, Update):
        o = redex.recv
        l = o.loc(redex.method)
        if l not in heap:
            return "dangling-location"
        h = dict(heap)
        h[l] = Lam(redex.self_var, redex.self_annot, redex.body)
        return h, o, "Red-Upd", ()
    if isinstance(redex, Clone):
        o = redex.arg
        if any(l not in heap for _, l in o.locs):
            return "dangling-location"
        names = sorted(n for n, _ in o.locs)
        locs = alloc.fresh(heap, len(names))
        where = dict(zip(names, locs))
        h = dict(heap)
        for n, l in o.locs:
            h[where[n]] = heap[l]
        return h, RuntimeObj(tuple((n, where[n]) for n, _ in o.locs)), "Red-Clone", tuple(locs)
    if isinstance(redex, App):
        f = redex.fun
        return heap, subst(f.body, {f.var: redex.arg}), "Red-Beta", ()
    if isinstance(redex, Unfold):
        return heap, redex.arg.arg, "Red-Unfold", ()
    if isinstance(redex, TApp):
        f = redex.fun
        return heap, subst_type_in_term(f.body, f.tvar, redex.targ), "Red-TBeta", ()
    if isinstance(redex, Open):
        p = redex.arg
        payload = subst_type_in_term(p.payload, p.tvar, p.witness)
        body = subst(redex.body, {redex.var: payload}, {redex.tvar: p.witness})
        return heap, body, "Red-Open", ()
    raise TypeError(f"not a redex: {redex!r}")  # pragma: no cover


def step(c: Config, alloc=None) -> Union[Stepped, Irreducible]:
    alloc = alloc or CanonicalAllocator()
    d = decompose(c.term)
    if isinstance(d, ValueForm):
        return Irreducible("value")
    if isinstance(d, StuckForm):
        return Irreducible("stuck", d.reason)
    r = contract(c.heap, d.redex, alloc)
    if isinstance(r, str):
        return Irreducible("stuck", r)
    h, t, rule, locs = r
    return Stepped(Config(h, plug(d.ctx, t)), rule, locs, d.redex)


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    rule: str
    config: Config
    allocated: Tuple[int, ...] = ()
    redex: Optional[Term] = None


@dataclass
class Trace:
    initial: Config
    steps: List[Step] = field(default_factory=list)
    outcome: str = "value"  # "value" | "stuck" | "fuel"
    reason: Optional[str] = None

    @property
    def final(self) -> Config:
        return self.steps[-1].config if self.steps else self.initial

    def __len__(self) -> int:
        return len(self.steps)

    def render(self) -> str:
        lines = [f"[0] start {self.initial.show()}"]
        for i, s in enumerate(self.steps, 1):
            lines.append(f"[{i}] {s.rule} {s.config.show()}")
        lines.append("outcome: " + outcome_label(self.outcome, self.reason))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        from .syntax.jsondump import to_json

        def cfg(c: Config) -> dict:
            return {
                "heap": {loc_name(l): print_term(c.heap[l]) for l in sorted(c.heap)},
                "term": print_term(c.term),
                "ast": to_json(c.term),
            }

        return {
            "initial": cfg(self.initial),
            "steps": [{"rule": s.rule, "config": cfg(s.config)} for s in self.steps],
            "outcome": self.outcome,
            "reason": self.reason,
            "length": len(self.steps),
        }


def outcome_label(outcome: str, reason: Optional[str]) -> str:
    if outcome == "value":
        return "Value"
    if outcome == "fuel":
        return "FuelExhausted"
    return f"Stuck({reason})"


def run(c: Config, fuel: int, alloc=None, record: bool = True) -> Trace:
    """Take at most ``fuel`` steps."""
    alloc = alloc or CanonicalAllocator()
    tr = Trace(c)
    cur = c
    for _ in range(fuel):
        r = step(cur, alloc)
        if isinstance(r, Irreducible):
            tr.outcome, tr.reason = r.kind, r.reason
            return tr
        cur = r.config
        tr.steps.append(Step(r.rule, cur, r.allocated, r.redex if record else None))
    r = step(cur, CanonicalAllocator())
    if isinstance(r, Irreducible):
        tr.outcome, tr.reason = r.kind, r.reason
    else:
        tr.outcome = "fuel"
    return tr


def run_term(t: Term, fuel: int, alloc=None) -> Trace:
    return run(Config({}, t), fuel, alloc)


def safe_k(c: Config, k: int) -> bool:
    """No irreducible non-value is reachable in fewer than k steps."""
    if k <= 0:
        return True
    tr = run(c, k - 1, record=False)
    return tr.outcome != "stuck"


# ---------------------------------------------------------------------------
# Location renaming
# ---------------------------------------------------------------------------


def rename_locs(t: Term, mp: Mapping[int, int]) -> Term:
    """Rename locations occurring in a term."""
    if not (t.fv[2] & mp.keys()):
        return t
    if isinstance(t, RuntimeObj):
        return RuntimeObj(tuple((n, mp.get(l, l)) for n, l in t.locs))
    kids = {}
    for f in t.__dataclass_fields__:
        v = getattr(t, f)
        if isinstance(v, Term):
            v = rename_locs(v, mp)
        elif f == "methods":
            v = tuple((n, x, A, rename_locs(b, mp)) for n, x, A, b in v)
        kids[f] = v
    return type(t)(**kids)


def config_loc_equiv(c1: Config, c2: Config, bij: Mapping[int, int]) -> bool:
    """c2 equals c1 after renaming c1's locations by ``bij`` (up to alpha)."""
    if set(bij.get(l, l) for l in c1.heap) != set(c2.heap):
        return False
    if not alpha_eq(rename_locs(c1.term, bij), c2.term):
        return False
    for l, v in c1.heap.items():
        if not alpha_eq(rename_locs(v, bij), c2.heap[bij.get(l, l)]):
            return False
    return True


def traces_loc_equiv(t1: Trace, t2: Trace) -> bool:
    """Equal length, same rules, pointwise location-renaming-equivalent configs."""
    if len(t1) != len(t2) or t1.outcome != t2.outcome or t1.reason != t2.reason:
        return False
    bij: Dict[int, int] = {l: l for l in t1.initial.heap}
    if not config_loc_equiv(t1.initial, t2.initial, bij):
        return False
    for s1, s2 in zip(t1.steps, t2.steps):
        if s1.rule != s2.rule or len(s1.allocated) != len(s2.allocated):
            return False
        bij.update(zip(s1.allocated, s2.allocated))
        if not config_loc_equiv(s1.config, s2.config, bij):
            return False
    return True
