"""Algorithmic term typing.

Types are synthesized bottom-up; subsumption happens only where a term is
consumed (application arguments, receivers of updates, fold/unfold and
pack/open positions).  A receiver whose type is Bot synthesizes Bot at every
elimination.  In split mode every annotation is first encoded into
``[m:(write, read)]`` form.
"""
from __future__ import annotations

from typing import List, Optional

from ..syntax.ast import (
    BOT,
    All,
    App,
    Arrow,
    Bot,
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
    Some,
    TApp,
    Term,
    TLam,
    TVar,
    Type,
    Unfold,
    Update,
    Var,
)
from ..syntax.binding import alpha_eq_type, desugar_self_in_term, fresh, map_term_types, subst, subst_type, term_types
from .context import EMPTY, Context
from .encode import encode_to_split
from .subtype import DEFAULT_FUEL, SPLIT, VARIANCE, Fuel, OutOfFuel, Rules, _sub, explain

MUTATIONS = (
    "drop-inv-variance",
    "drop-upd-variance",
    "covariant-upd-body",
    "width-reversed-subobj",
    "con-read-at-payload",
)


class TypeErr(Exception):
    """A typing rule failed.  ``rule`` names it, ``term`` is the offending subterm."""

    def __init__(self, rule: str, term, msg: str, explanation: Optional[List[str]] = None):
        super().__init__(f"{rule}: {msg}")
        self.rule = rule
        self.term = term
        self.msg = msg
        self.explanation = explanation or []

    def render(self) -> str:
        from ..syntax.pretty import show

        lines = [f"type error in rule {self.rule}: {self.msg}"]
        if self.term is not None:
            lines.append(f"  at: {show(self.term)}")
        for i, e in enumerate(self.explanation):
            lines.append("  " + "  " * i + "- " + e)
        return "\n".join(lines)


class TypeFuelExhausted(Exception):
    """The checker ran out of fuel (subtyping may not terminate)."""


def _has_split(A: Type) -> bool:
    if isinstance(A, ObjSplit):
        return True
    return any(_has_split(k) for k in A.children())


class _Checker:
    def __init__(self, fuel: int, rules: Rules):
        self.fuel = Fuel(fuel)
        self.rules = rules
        self.split = rules.mode == SPLIT

    # -- helpers ---------------------------------------------------------
    def sub(self, ctx: Context, A: Type, B: Type, rule: str, term, what: str):
        f = _sub(ctx, A, B, self.fuel, self.rules)
        if f is not None:
            raise TypeErr(rule, term, f"{what}: {A} is not a subtype of {B}", explain(f))

    def wf(self, ctx: Context, A: Type, term):
        missing = A.ftv - ctx.type_names
        if missing:
            raise TypeErr("WF", term, f"unbound type variable {sorted(missing)[0]} in {A}")

    def expose(self, ctx: Context, A: Type) -> Type:
        seen = 0
        while isinstance(A, TVar):
            b = ctx.bound(A.name)
            if b is None:
                raise TypeErr("WF", None, f"unbound type variable {A.name}")
            A = b
            seen += 1
            self.fuel.tick()
        return A

    def obj_type(self, A: Type):
        return isinstance(A, ObjSplit) if self.split else isinstance(A, ObjV)

    def method(self, A: Type, name: str):
        """(variance, type) in variance mode, (write, read) in split mode."""
        for m in A.methods:
            if m[0] == name:
                return m[1], m[2]
        return None

    # -- synthesis -------------------------------------------------------
    def typeof(self, ctx: Context, t: Term) -> Type:
        self.fuel.tick()
        meth = getattr(self, "t_" + type(t).__name__)
        return meth(ctx, t)

    def t_Var(self, ctx, t: Var):
        A = ctx.term_type(t.name)
        if A is None:
            raise TypeErr("Var", t, f"unbound variable {t.name}")
        return A

    def t_RuntimeObj(self, ctx, t):
        raise TypeErr("Program", t, "run-time objects (locations) are not typable")

    def t_Lam(self, ctx, t: Lam):
        self.wf(ctx, t.annot, t)
        x, body = t.var, t.body
        if x in ctx.term_names:
            x = fresh(x, ctx.term_names | body.fv[0])
            body = subst(body, {t.var: Var(x)})
        return Arrow(t.annot, self.typeof(ctx.add_term(x, t.annot), body))

    def t_App(self, ctx, t: App):
        F = self.expose(ctx, self.typeof(ctx, t.fun))
        A = self.typeof(ctx, t.arg)
        if isinstance(F, Bot):
            return BOT
        if not isinstance(F, Arrow):
            raise TypeErr("App", t, f"applying a term of non-procedure type {F}")
        self.sub(ctx, A, F.dom, "App", t, "argument")
        return F.cod

    def t_ObjNew(self, ctx, t: ObjNew):
        A = t.annot
        self.wf(ctx, A, t)
        if not self.obj_type(A):
            raise TypeErr("Obj", t, f"object literal annotated with non-object type {A}")
        if self.split:
            for n, w, r in A.methods:
                if not alpha_eq_type(w, r):
                    raise TypeErr("Obj-Gen", t, f"method {n} must be created with equal write and read types")
        lit = [n for n, _, _, _ in t.methods]
        if set(lit) != set(A.names):
            raise TypeErr("Obj", t, f"literal methods {sorted(lit)} differ from annotation methods {sorted(A.names)}")
        for n, x, S, b in t.methods:
            if not alpha_eq_type(S, A):
                raise TypeErr("Obj", t, f"self parameter of {n} must be annotated with {A}, got {S}")
            _, Ad = self.method(A, n)
            if x in ctx.term_names:
                x2 = fresh(x, ctx.term_names | b.fv[0])
                b = subst(b, {x: Var(x2)})
                x = x2
            B = self.typeof(ctx.add_term(x, A), b)
            self.sub(ctx.add_term(x, A), B, Ad, "Obj", t, f"body of method {n}")
        return A

    def t_Invoke(self, ctx, t: Invoke):
        A = self.expose(ctx, self.typeof(ctx, t.recv))
        if isinstance(A, Bot):
            return BOT
        if not self.obj_type(A):
            raise TypeErr("Inv", t, f"invoking {t.method} on non-object type {A}")
        m = self.method(A, t.method)
        if m is None:
            raise TypeErr("Inv", t, f"method {t.method} not in {A}")
        if self.split:
            w, r = m
            return w if self.rules.mutation == "con-read-at-payload" else r
        v, Ae = m
        if v == "con" and self.rules.mutation != "drop-inv-variance":
            raise TypeErr("Inv", t, f"method {t.method} is update-only (con) in {A}")
        return Ae

    def t_Update(self, ctx, t: Update):
        S = t.self_annot
        self.wf(ctx, S, t)
        rule = "Upd-Gen" if self.split else "Upd"
        if not self.obj_type(S):
            raise TypeErr(rule, t, f"self annotation {S} of an update must be an object type")
        R = self.typeof(ctx, t.recv)
        self.sub(ctx, R, S, rule, t, "receiver")
        m = self.method(S, t.method)
        if m is None:
            raise TypeErr(rule, t, f"method {t.method} not in {S}")
        if self.split:
            target = m[0]
        else:
            v, target = m
            if v == "cov" and self.rules.mutation != "drop-upd-variance":
                raise TypeErr(rule, t, f"method {t.method} is invoke-only (cov) in {S}")
        x, b = t.self_var, t.body
        if x in ctx.term_names:
            x2 = fresh(x, ctx.term_names | b.fv[0])
            b, x = subst(b, {x: Var(x2)}), x2
        inner = ctx.add_term(x, S)
        B = self.typeof(inner, b)
        if self.rules.mutation == "covariant-upd-body":
            f1 = _sub(inner, B, target, self.fuel, self.rules)
            if f1 is not None and _sub(inner, target, B, self.fuel, self.rules) is not None:
                raise TypeErr(rule, t, f"new body of {t.method}: {B} unrelated to {target}", explain(f1))
        else:
            self.sub(inner, B, target, rule, t, f"new body of {t.method}")
        return S

    def t_Clone(self, ctx, t: Clone):
        A = self.expose(ctx, self.typeof(ctx, t.arg))
        if isinstance(A, Bot):
            return BOT
        if not self.obj_type(A):
            raise TypeErr("Clone", t, f"cloning a term of non-object type {A}")
        return A

    def t_Fold(self, ctx, t: Fold):
        M = t.annot
        self.wf(ctx, M, t)
        if not isinstance(M, Mu):
            raise TypeErr("Fold", t, f"fold annotation {M} is not a recursive type")
        A = self.typeof(ctx, t.arg)
        self.sub(ctx, A, subst_type(M.body, M.var, M), "Fold", t, "folded term")
        return M

    def t_Unfold(self, ctx, t: Unfold):
        M = t.annot
        self.wf(ctx, M, t)
        if not isinstance(M, Mu):
            raise TypeErr("Unfold", t, f"unfold annotation {M} is not a recursive type")
        A = self.typeof(ctx, t.arg)
        self.sub(ctx, A, M, "Unfold", t, "unfolded term")
        return subst_type(M.body, M.var, M)

    def t_TLam(self, ctx, t: TLam):
        self.wf(ctx, t.bound, t)
        X, body = t.tvar, t.body
        if X in ctx.type_names:
            X = fresh(X, ctx.type_names | body.fv[1])
            body = subst(body, None, {t.tvar: TVar(X)})
        return All(X, t.bound, self.typeof(ctx.add_type(X, t.bound), body))

    def t_TApp(self, ctx, t: TApp):
        self.wf(ctx, t.targ, t)
        F = self.expose(ctx, self.typeof(ctx, t.fun))
        if isinstance(F, Bot):
            return BOT
        if not isinstance(F, All):
            raise TypeErr("TApp", t, f"type application of a term of non-universal type {F}")
        self.sub(ctx, t.targ, F.bound, "TApp", t, "type argument")
        return subst_type(F.body, F.var, t.targ)

    def t_Pack(self, ctx, t: Pack):
        self.wf(ctx, t.bound, t)
        self.wf(ctx, t.witness, t)
        self.wf(ctx.add_type(t.tvar, t.bound) if t.tvar not in ctx.type_names else ctx, t.body_type, t)
        self.sub(ctx, t.witness, t.bound, "Pack", t, "witness")
        payload = subst(t.payload, None, {t.tvar: t.witness})
        B = self.typeof(ctx, payload)
        self.sub(ctx, B, subst_type(t.body_type, t.tvar, t.witness), "Pack", t, "payload")
        return Some(t.tvar, t.bound, t.body_type)

    def t_Open(self, ctx, t: Open):
        self.wf(ctx, t.bound, t)
        self.wf(ctx, t.result_type, t)
        X, x, VT, body = t.tvar, t.var, t.var_type, t.body
        if X in ctx.type_names:
            X = fresh(X, ctx.type_names | body.fv[1] | VT.ftv)
            VT = subst_type(VT, t.tvar, TVar(X))
            body = subst(body, None, {t.tvar: TVar(X)})
        inner = ctx.add_type(X, t.bound)
        self.wf(inner, VT, t)
        A = self.typeof(ctx, t.arg)
        self.sub(ctx, A, Some(X, t.bound, VT), "Open", t, "opened term")
        if x in inner.term_names:
            x2 = fresh(x, inner.term_names | body.fv[0])
            body, x = subst(body, {x: Var(x2)}), x2
        inner = inner.add_term(x, VT)
        C = self.typeof(inner, body)
        self.sub(inner, C, t.result_type, "Open", t, "body")
        return t.result_type


def prepare(t: Term, mode: str = VARIANCE) -> Term:
    """Desugar self types and, in split mode, encode every annotation."""
    t = desugar_self_in_term(t)
    if mode == SPLIT:
        return map_term_types(t, lambda A: encode_to_split(A, strict=False))
    for A in term_types(t):
        if _has_split(A):
            raise TypeErr("Mode", t, f"split object type {A} used in variance mode")
    return t


def typeof(
    ctx: Optional[Context],
    a: Term,
    mode: str = VARIANCE,
    fuel: int = DEFAULT_FUEL,
    mutation: Optional[str] = None,
) -> Type:
    """Synthesize a type for ``a`` or raise TypeErr / TypeFuelExhausted."""
    if mode not in (VARIANCE, SPLIT):
        raise ValueError(f"unknown mode {mode!r}")
    if mutation is not None and mutation not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutation!r}")
    ctx = ctx if ctx is not None else EMPTY
    if mode == SPLIT:
        ctx = Context(_encode_bind(b) for b in ctx.binds)
    chk = _Checker(fuel, Rules(mode, mutation))
    a = prepare(a, mode)
    try:
        return chk.typeof(ctx, a)
    except OutOfFuel:
        raise TypeFuelExhausted("type checking ran out of fuel") from None
    except RecursionError:
        raise TypeFuelExhausted("type checking exceeded the recursion limit") from None


def _encode_bind(b):
    from .context import TermBind, TypeBind

    if isinstance(b, TermBind):
        return TermBind(b.name, encode_to_split(b.type, strict=False))
    return TypeBind(b.name, encode_to_split(b.bound, strict=False))


def check(
    ctx: Optional[Context],
    a: Term,
    A: Type,
    mode: str = VARIANCE,
    fuel: int = DEFAULT_FUEL,
    mutation: Optional[str] = None,
) -> bool:
    """True when ``a`` has type ``A`` (synthesis followed by one subtype check)."""
    ctx = ctx if ctx is not None else EMPTY
    B = typeof(ctx, a, mode, fuel, mutation)
    target = encode_to_split(A, strict=False) if mode == SPLIT else A
    from ..syntax.binding import desugar_self

    target = desugar_self(target)
    if mode == SPLIT:
        ctx = Context(_encode_bind(b) for b in ctx.binds)
    chk = _Checker(fuel, Rules(mode, mutation))
    try:
        chk.sub(ctx, B, target, "Sub", a, "result")
    except OutOfFuel:
        raise TypeFuelExhausted("subtype check ran out of fuel") from None
    return True


def typable(a: Term, mode: str = VARIANCE, fuel: int = DEFAULT_FUEL, mutation: Optional[str] = None) -> Optional[Type]:
    """The synthesized type of a closed program, or None when it is rejected."""
    try:
        return typeof(EMPTY, a, mode, fuel, mutation)
    except (TypeErr, TypeFuelExhausted):
        return None
