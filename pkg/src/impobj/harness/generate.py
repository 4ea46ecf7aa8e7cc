"""Type-directed generation of closed, well-typed programs.

``gen`` walks the typing rules backwards: given a goal type it picks a rule
whose conclusion can produce that type and recurses on the premises.
Besides the introduction and elimination forms there is a *speculative*
production: it builds an object, views it through a randomly perturbed
object type and then invokes or updates a method through that view.  Only
views the checker accepts survive, so with the stock rules these are
ordinary subsumption steps, while a deliberately broken rule lets unsound
views through and the resulting programs can get stuck.

Every emitted program is re-checked against the goal type before it is
returned.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

from ..syntax.ast import (
    BOT,
    TOP,
    All,
    App,
    Arrow,
    Clone,
    Fold,
    Invoke,
    Lam,
    Mu,
    ObjNew,
    ObjSplit,
    ObjV,
    Open,
    Pack,
    RuntimeObj,
    SelfObj,
    Some,
    TApp,
    Term,
    TLam,
    Top,
    TVar,
    Type,
    Unfold,
    Update,
    Var,
)
from ..syntax.binding import desugar_self, subst_type
from ..typecheck import EMPTY, SPLIT, VARIANCE, Context, TypeErr, TypeFuelExhausted, check, subtype
from ..typecheck.typing import MUTATIONS


@dataclass(frozen=True)
class GenConfig:
    max_term_depth: int = 6
    max_type_size: int = 5
    method_names: Tuple[str, ...] = ("m", "n", "p")
    fuel: int = 500
    seed: int = 0
    mode: str = VARIANCE
    quantifiers: bool = True
    recursion: bool = True
    self_types: bool = True
    mutation: Optional[str] = None
    retries: int = 20
    check_fuel: int = 20_000

    def __post_init__(self):
        if self.max_term_depth < 1 or self.max_type_size < 1 or self.fuel < 1 or self.retries < 1:
            raise ValueError("generator bounds must be at least 1")
        if not self.method_names:
            raise ValueError("method name pool must be nonempty")
        if self.mutation is not None and self.mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {self.mutation!r}")


class GenerationFailed(Exception):
    pass


def term_depth(t: Term) -> int:
    """Height of the term tree; variables and run-time objects have depth 0."""
    if isinstance(t, (Var, RuntimeObj)):
        return 0
    if isinstance(t, ObjNew):
        return 1 + max((term_depth(b) for _, _, _, b in t.methods), default=0)
    kids = [getattr(t, f) for f in t.__dataclass_fields__]
    return 1 + max((term_depth(k) for k in kids if isinstance(k, Term)), default=0)


def _unfold(M: Mu) -> Type:
    return subst_type(M.body, M.var, M)


def _obj(*ms) -> ObjV:
    return ObjV(tuple(ms))


# A few recursive and self types used as goals; they keep programs interesting
# without making random recursive types (most of which are uninhabited).
_Q = _obj(("p", "inv", TOP))
_CELL = Mu("X", _obj(("m", "inv", TOP), ("n", "inv", TVar("X"))))
_STREAM = Mu("X", _obj(("m", "cov", _Q), ("n", "inv", TVar("X"))))
_BK = desugar_self(SelfObj("X", (("m", "inv", TVar("X")), ("n", "inv", TVar("X")))))
_LIST = desugar_self(SelfObj("X", (("m", "inv", TOP), ("n", "inv", TVar("X")))))


class Generator:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.names = cfg.method_names
        self.counter = 0

    # -- utilities -------------------------------------------------------
    def fresh(self, base: str) -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def sub(self, ctx: Context, A: Type, B: Type) -> bool:
        return subtype(ctx, A, B, fuel=500, mode=self.cfg.mode, mutation=self.cfg.mutation).yes

    def valid(self, ctx: Context, t: Term, A: Type) -> bool:
        try:
            return check(ctx, t, A, self.cfg.mode, self.cfg.check_fuel, self.cfg.mutation)
        except (TypeErr, TypeFuelExhausted):
            return False

    def small_type(self, ctx: Context, size: int) -> Type:
        r = self.rng.random()
        tvars = [b.name for b in ctx.binds if hasattr(b, "bound")]
        if size <= 1 or r < 0.25:
            if tvars and self.rng.random() < 0.3:
                return TVar(self.rng.choice(tvars))
            return self.rng.choice([TOP, TOP, _Q, _obj()])
        if r < 0.45:
            a = self.rng.randint(1, max(1, size - 2))
            return Arrow(self.small_type(ctx, a), self.small_type(ctx, size - 1 - a))
        if r < 0.8:
            k = self.rng.randint(1, min(2, len(self.names)))
            ms = self.rng.sample(list(self.names), k)
            return ObjV(tuple((n, self.rng.choice(("inv", "inv", "cov", "con")), self.small_type(ctx, (size - 1) // k)) for n in ms))
        pool = []
        if self.cfg.recursion:
            pool += [_CELL, _STREAM]
        if self.cfg.self_types:
            pool += [_BK, _LIST]
        if self.cfg.quantifiers:
            pool += [All("Z", TOP, Arrow(TVar("Z"), TVar("Z"))), Some("Z", _Q, _obj(("m", "inv", TVar("Z"))))]
        if not pool:
            return TOP
        return self.rng.choice(pool)

    # -- main entry --------------------------------------------------------
    def gen(self, ctx: Context, goal: Type, d: int) -> Optional[Term]:
        """A term of a subtype of ``goal`` with depth at most ``d``, or None."""
        prods: List[Callable] = []
        if d >= 1:
            prods += [self.p_intro] * 3
            prods += [self.p_invoke, self.p_app, self.p_let, self.p_update, self.p_clone] + [self.p_speculate] * 3
            if self.cfg.recursion:
                prods.append(self.p_unfold)
            if self.cfg.quantifiers:
                prods += [self.p_tapp, self.p_open]
        self.rng.shuffle(prods)
        var = self.p_var(ctx, goal)
        if var is not None and (d == 0 or self.rng.random() < 0.3):
            return var
        for p in prods:
            t = p(ctx, goal, d)
            if t is not None:
                return t
        if var is not None:
            return var
        return self.p_diverge(ctx, goal, d)

    def p_var(self, ctx, goal, d=0):
        xs = [b.name for b in ctx.binds if hasattr(b, "type") and self.sub(ctx, b.type, goal)]
        return Var(self.rng.choice(xs)) if xs else None

    def p_diverge(self, ctx, goal, d):
        """``obj [m:inv goal]{m = ς(s) s.m}.m`` inhabits every type."""
        if d < 2:
            return None
        A = _obj(("m", "inv", goal))
        s = self.fresh("s")
        return Invoke(ObjNew(A, (("m", s, A, Invoke(Var(s), "m")),)), "m")

    # -- introduction forms ---------------------------------------------
    def p_intro(self, ctx, goal, d):
        if isinstance(goal, Top):
            return self.gen(ctx, self.small_type(ctx, 3), d)
        if isinstance(goal, Arrow):
            x = self.fresh("x")
            body = self.gen(ctx.add_term(x, goal.dom), goal.cod, d - 1)
            return None if body is None else Lam(x, goal.dom, body)
        if isinstance(goal, ObjV):
            return self.objlit(ctx, goal, d)
        if isinstance(goal, ObjSplit):
            return None
        if isinstance(goal, Mu):
            arg = self.gen(ctx, _unfold(goal), d - 1)
            return None if arg is None else Fold(goal, arg)
        if isinstance(goal, All):
            X = self.fresh("Z")
            body = self.gen(ctx.add_type(X, goal.bound), subst_type(goal.body, goal.var, TVar(X)), d - 1)
            return None if body is None else TLam(X, goal.bound, body)
        if isinstance(goal, Some):
            C = goal.bound
            payload = self.gen(ctx, subst_type(goal.body, goal.var, C), d - 1)
            return None if payload is None else Pack(goal.var, goal.bound, C, payload, goal.body)
        return None

    def objlit(self, ctx, goal: ObjV, d, annot: Optional[ObjV] = None):
        """An object literal created at the invariant version of ``goal``."""
        if annot is None:
            ms = [(n, "inv", T) for n, v, T in goal.methods]
            extra = [n for n in self.names if n not in goal.names]
            if extra and self.rng.random() < 0.25:
                ms.append((self.rng.choice(extra), "inv", TOP))
            annot = ObjV(tuple(ms))
        out = []
        for n, _, T in annot.methods:
            s = self.fresh("s")
            b = self.gen(ctx.add_term(s, annot), T, d - 1)
            if b is None:
                return None
            out.append((n, s, annot, b))
        return ObjNew(annot, tuple(out))

    # -- elimination forms ----------------------------------------------
    def p_invoke(self, ctx, goal, d):
        if d < 2:
            return None
        m = self.rng.choice(self.names)
        R = ObjV(((m, self.rng.choice(("inv", "cov")), goal),))
        recv = self.gen(ctx, R, d - 1)
        return None if recv is None else Invoke(recv, m)

    def p_unfold(self, ctx, goal, d):
        if d < 3:
            return None
        M = Mu("X", _obj(("m", "inv", goal), ("n", "inv", TVar("X"))))
        if goal.ftv & {"X"}:
            return None
        recv = self.gen(ctx, M, d - 2)
        return None if recv is None else Invoke(Unfold(M, recv), "m")

    def p_app(self, ctx, goal, d):
        if d < 2:
            return None
        S = self.small_type(ctx, 2)
        f = self.gen(ctx, Arrow(S, goal), d - 1)
        if f is None:
            return None
        a = self.gen(ctx, S, d - 1)
        return None if a is None else App(f, a)

    def p_let(self, ctx, goal, d):
        if d < 3:
            return None
        S = self.small_type(ctx, 3)
        a = self.gen(ctx, S, d - 1)
        if a is None:
            return None
        x = self.fresh("x")
        body = self.gen(ctx.add_term(x, S), goal, d - 2)
        return None if body is None else App(Lam(x, S, body), a)

    def p_update(self, ctx, goal, d):
        if not isinstance(goal, ObjV) or d < 2:
            return None
        ms = [(n, T) for n, v, T in goal.methods if v in ("inv", "con")]
        if not ms:
            return None
        n, T = self.rng.choice(ms)
        recv = self.gen(ctx, goal, d - 1)
        if recv is None:
            return None
        s = self.fresh("s")
        body = self.gen(ctx.add_term(s, goal), T, d - 1)
        return None if body is None else Update(recv, n, s, goal, body)

    def p_clone(self, ctx, goal, d):
        if not isinstance(goal, ObjV) or d < 2:
            return None
        a = self.gen(ctx, goal, d - 1)
        return None if a is None else Clone(a)

    def p_tapp(self, ctx, goal, d):
        if d < 3:
            return None
        X = self.fresh("Z")
        body = self.gen(ctx.add_type(X, TOP), goal, d - 2)
        return None if body is None else TApp(TLam(X, TOP, body), self.small_type(ctx, 2))

    def p_open(self, ctx, goal, d):
        if d < 3:
            return None
        X, x = self.fresh("Z"), self.fresh("x")
        S = _obj(("m", "inv", TVar(X)))
        packed = self.gen(ctx, Some(X, _Q, S), d - 1)
        if packed is None:
            return None
        inner = ctx.add_type(X, _Q).add_term(x, S)
        body = self.gen(inner, goal, d - 1)
        return None if body is None else Open(packed, X, _Q, x, S, body, goal)

    # -- speculative views ------------------------------------------------
    def _neighbor(self, T: Type) -> Type:
        if isinstance(T, Top):
            return self.rng.choice([_Q, Arrow(TOP, TOP), BOT])
        if T == _Q:
            return self.rng.choice([TOP, _obj()])
        return self.rng.choice([TOP, _Q])

    def perturb(self, C: ObjV) -> Type:
        """An object type one small step away from C; it may or may not be a supertype."""
        if self.rng.random() < 0.2:
            return C
        if self.cfg.mode == SPLIT:
            ms = []
            for n, _, T in C.methods:
                w = T if self.rng.random() < 0.4 else self._neighbor(T)
                r = T if self.rng.random() < 0.4 else self._neighbor(T)
                ms.append((n, w, r))
            return ObjSplit(tuple(ms))
        ms = []
        for n, v, T in C.methods:
            if self.rng.random() < 0.1:
                continue
            nv = v if self.rng.random() < 0.3 else self.rng.choice(("cov", "con"))
            nT = T if self.rng.random() < 0.4 else self._neighbor(T)
            ms.append((n, nv, nT))
        extra = [n for n in self.names if n not in C.names]
        if extra and self.rng.random() < 0.2:
            ms.append((self.rng.choice(extra), "inv", self.rng.choice([TOP, _Q])))
        return ObjV(tuple(ms))

    def p_speculate(self, ctx, goal, d):
        if d < 4:
            return None
        names = list(self.names)
        k = self.rng.randint(1, min(2, len(names)))
        C = ObjV(tuple((n, "inv", self.rng.choice([_Q, _Q, TOP, TOP, Arrow(TOP, TOP)])) for n in self.rng.sample(names, k)))
        o = ObjNew(C, tuple((n, self.fresh("s"), C, self._canned(T)) for n, _, T in C.methods))
        V = self.perturb(C)
        if not V.methods:
            return None
        m = self.rng.choice(V.methods)[0]
        if self.rng.random() < 0.5:
            # read through the view
            x = self.fresh("x")
            chain = App(Lam(x, V, self._use(Var(x), V, m)), o)
        else:
            # write through the view, then read through the original alias
            y, s, z, w = self.fresh("y"), self.fresh("s"), self.fresh("z"), self.fresh("w")
            body = self.rng.choice([
                ObjNew(_obj(), ()),
                Lam(w, TOP, Var(w)),
                App(Lam(w, TOP, Var(w)), ObjNew(_obj(), ())),
            ])
            upd = Update(Var(y), m, s, V, body)
            chain = App(Lam(y, C, App(Lam(z, TOP, self._use(Var(y), C, m)), upd)), o)
        if term_depth(chain) > d:
            return None
        T = self._synth(ctx, chain)
        if T is None:
            return None
        if self.sub(ctx, T, goal):
            return chain
        if term_depth(chain) > d - 1:
            return None
        rest = self.gen(ctx, goal, d - 2)
        if rest is None:
            return None
        return App(Lam(self.fresh("w"), TOP, rest), chain)

    def _canned(self, T: Type) -> Term:
        """A small closed value of type T: an object for Q, a procedure otherwise."""
        if T == _Q:
            s = self.fresh("s")
            return ObjNew(_Q, (("p", s, _Q, Var(s)),))
        w = self.fresh("w")
        return Lam(w, TOP, Var(w))

    def _use(self, recv: Term, A: Type, m: str) -> Term:
        """Invoke m, then use the result as a procedure or as an object."""
        t = Invoke(recv, m)
        T = None
        for entry in getattr(A, "methods", ()):
            if entry[0] == m:
                T = entry[2]
        if isinstance(T, Arrow) and self.rng.random() < 0.7:
            w = self.fresh("w")
            return App(t, Lam(w, TOP, Var(w)))
        return Invoke(t, "p")

    def _synth(self, ctx, t):
        from ..typecheck import typeof

        try:
            return typeof(ctx, t, self.cfg.mode, self.cfg.check_fuel, self.cfg.mutation)
        except (TypeErr, TypeFuelExhausted):
            return None


def program_seed(seed: int, index: int) -> int:
    return (seed * 1_000_003 + index) & 0xFFFFFFFF


def gen_well_typed(cfg: GenConfig, goal: Optional[Type] = None) -> Tuple[Term, Type]:
    """A closed program that checks at the returned type (deterministic per seed)."""
    rng = random.Random(cfg.seed)
    for _ in range(cfg.retries):
        g = Generator(cfg, rng)
        if goal is not None:
            A = goal
        else:
            A = TOP if rng.random() < 0.25 else g.small_type(EMPTY, cfg.max_type_size)
        t = g.gen(EMPTY, A, cfg.max_term_depth)
        if t is None or term_depth(t) > cfg.max_term_depth:
            continue
        if g.valid(EMPTY, t, A):
            return t, A
    raise GenerationFailed(f"no program found after {cfg.retries} attempts (seed {cfg.seed})")
