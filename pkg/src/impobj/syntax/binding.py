"""Binding machinery: free variables, capture-avoiding substitution,
canonical forms (alpha-equivalence), erasure and self-type desugaring."""
from __future__ import annotations

from typing import Dict, Iterable, Mapping, Optional, Tuple

from .ast import (
    TOP,
    App,
    Clone,
    Fold,
    Invoke,
    Lam,
    Mu,
    ObjNew,
    ObjV,
    Open,
    Pack,
    RuntimeObj,
    SelfObj,
    Some,
    TApp,
    TLam,
    Term,
    TVar,
    Type,
    Unfold,
    Update,
    Var,
)

ValueEnv = Mapping[str, Term]


def fresh(base: str, avoid: Iterable[str]) -> str:
    """A variant of ``base`` (primed) not in ``avoid``."""
    avoid = set(avoid)
    root = base.rstrip("'")
    if root.startswith("#"):
        root = "v"
    cand = root + "'"
    while cand in avoid:
        cand += "'"
    return cand


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


def subst_types(A: Type, mapping: Mapping[str, Type]) -> Type:
    """Simultaneous capture-avoiding substitution of types for type variables."""
    mp = {k: v for k, v in mapping.items() if k in A.ftv}
    if not mp:
        return A
    return _subst_ty(A, mp)


def _subst_ty(A: Type, mp: Dict[str, Type]) -> Type:
    if isinstance(A, TVar):
        return mp.get(A.name, A)
    b = A.binder
    kids = A.children()
    scoped = A.scoped()
    if b is None:
        new = tuple(subst_types(k, mp) for k in kids)
        return A.remake(None, new)
    inner = {k: v for k, v in mp.items() if k != b}
    inner_fv = set()
    for kid, sc in zip(kids, scoped):
        if sc:
            inner_fv |= kid.ftv
    inner = {k: v for k, v in inner.items() if k in inner_fv}
    nb = b
    if any(b in v.ftv for v in inner.values()):
        avoid = set(inner_fv)
        for v in inner.values():
            avoid |= v.ftv
        avoid |= set(inner)
        nb = fresh(b, avoid)
        inner[b] = TVar(nb)
    new = tuple(
        (subst_types(k, inner) if sc else subst_types(k, mp)) for k, sc in zip(kids, scoped)
    )
    return A.remake(nb, new)


def subst_type(A: Type, X: str, C: Type) -> Type:
    return subst_types(A, {X: C})


def _lvl(n: int) -> str:
    return f"#{n}"


def canon_type(A: Type) -> Type:
    """Canonical representative of A's alpha-class.

    Bound variables become ``#n`` (n = binder depth) and object methods are
    sorted by name.  Two types are alpha-equivalent iff their canonical
    forms are equal.
    """
    c = A.__dict__.get("_canon")
    if c is None:
        c = _canon_ty(A, {}, _offset(A.ftv))
        object.__setattr__(A, "_canon", c)
    return c


def _offset(names) -> int:
    """First level index that cannot clash with free ``#n`` names."""
    m = -1
    for n in names:
        if n.startswith("#") and n[1:].isdigit():
            m = max(m, int(n[1:]))
    return m + 1


def _canon_ty(A: Type, env: Dict[str, str], depth: int) -> Type:
    if isinstance(A, TVar):
        return TVar(env.get(A.name, A.name))
    b = A.binder
    kids = A.children()
    if not kids and b is None:
        return A
    if env and not (A.ftv & env.keys()):
        return canon_type(A)
    scoped = A.scoped()
    if b is not None:
        inner = dict(env)
        inner[b] = _lvl(depth)
        nb = _lvl(depth)
        new = tuple(
            _canon_ty(k, inner, depth + 1) if sc else _canon_ty(k, env, depth)
            for k, sc in zip(kids, scoped)
        )
    else:
        nb = None
        new = tuple(_canon_ty(k, env, depth) for k in kids)
    out = A.remake(nb, new)
    return _sort_methods(out)


def _sort_methods(A: Type) -> Type:
    ms = getattr(A, "methods", None)
    if ms is not None and isinstance(ms, tuple) and len(ms) > 1:
        srt = tuple(sorted(ms, key=lambda m: m[0]))
        if srt != ms:
            if isinstance(A, SelfObj):
                return SelfObj(A.var, srt)
            return type(A)(srt)
    return A


def alpha_eq_type(A: Type, B: Type) -> bool:
    return A is B or canon_type(A) == canon_type(B)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

_EMPTY = frozenset()


def _term_fv(t: Term) -> Tuple[frozenset, frozenset, frozenset]:
    if isinstance(t, Var):
        return frozenset((t.name,)), _EMPTY, _EMPTY
    if isinstance(t, RuntimeObj):
        return _EMPTY, _EMPTY, frozenset(l for _, l in t.locs)
    tv, yv, lv = set(), set(), set()

    def add(sub: Term, drop_t=(), drop_y=()):
        a, b, c = sub.fv
        tv.update(a.difference(drop_t))
        yv.update(b.difference(drop_y))
        lv.update(c)

    def addty(A: Type, drop_y=()):
        yv.update(A.ftv.difference(drop_y))

    if isinstance(t, ObjNew):
        addty(t.annot)
        for _, x, ax, body in t.methods:
            addty(ax)
            add(body, (x,))
    elif isinstance(t, Invoke):
        add(t.recv)
    elif isinstance(t, Update):
        add(t.recv)
        addty(t.self_annot)
        add(t.body, (t.self_var,))
    elif isinstance(t, Clone):
        add(t.arg)
    elif isinstance(t, Lam):
        addty(t.annot)
        add(t.body, (t.var,))
    elif isinstance(t, App):
        add(t.fun)
        add(t.arg)
    elif isinstance(t, (Fold, Unfold)):
        addty(t.annot)
        add(t.arg)
    elif isinstance(t, TLam):
        addty(t.bound)
        add(t.body, (), (t.tvar,))
    elif isinstance(t, TApp):
        add(t.fun)
        addty(t.targ)
    elif isinstance(t, Pack):
        addty(t.bound)
        addty(t.witness)
        add(t.payload, (), (t.tvar,))
        addty(t.body_type, (t.tvar,))
    elif isinstance(t, Open):
        add(t.arg)
        addty(t.bound)
        addty(t.var_type, (t.tvar,))
        add(t.body, (t.var,), (t.tvar,))
        addty(t.result_type)
    else:  # pragma: no cover
        raise TypeError(f"unknown term {t!r}")
    return frozenset(tv), frozenset(yv), frozenset(lv)


def free_vars(t: Term) -> Tuple[frozenset, frozenset, frozenset]:
    """(free term variables, free type variables, locations)."""
    return t.fv


def subst(t: Term, terms: Optional[Mapping[str, Term]] = None, types: Optional[Mapping[str, Type]] = None) -> Term:
    """Simultaneous capture-avoiding substitution in a term."""
    fvt, fvy, _ = t.fv
    tm = {k: v for k, v in (terms or {}).items() if k in fvt}
    ty = {k: v for k, v in (types or {}).items() if k in fvy}
    if not tm and not ty:
        return t
    return _subst(t, tm, ty)


def subst_term(t: Term, sigma: ValueEnv) -> Term:
    return subst(t, sigma, None)


def subst_type_in_term(t: Term, X: str, C: Type) -> Term:
    return subst(t, None, {X: C})


def _avoid_sets(tm, ty):
    at, ay = set(), set()
    for v in tm.values():
        a, b, _ = v.fv
        at |= a
        ay |= b
    for v in ty.values():
        ay |= v.ftv
    return at, ay


def _bind_term(x: str, bodies, tm, ty):
    """Enter a term binder x scoping over ``bodies``; returns (x', tm')."""
    tm2 = {k: v for k, v in tm.items() if k != x}
    used = set()
    for b in bodies:
        used |= b.fv[0]
    tm2 = {k: v for k, v in tm2.items() if k in used}
    at, _ = _avoid_sets(tm2, ty)
    if x in at:
        nx = fresh(x, at | used | set(tm2))
        tm2[x] = Var(nx)
        return nx, tm2
    return x, tm2


def _bind_type(X: str, terms, types_, tm, ty):
    """Enter a type binder X scoping over the given terms and types."""
    ty2 = {k: v for k, v in ty.items() if k != X}
    used = set()
    for b in terms:
        used |= b.fv[1]
    for A in types_:
        used |= A.ftv
    ty2 = {k: v for k, v in ty2.items() if k in used}
    _, ay = _avoid_sets(tm, ty2)
    if X in ay:
        nX = fresh(X, ay | used | set(ty2))
        ty2[X] = TVar(nX)
        return nX, ty2
    return X, ty2


def _sty(A: Type, ty) -> Type:
    return subst_types(A, ty) if ty else A


def _subst(t: Term, tm, ty) -> Term:
    if not tm and not ty:
        return t
    if isinstance(t, Var):
        return tm.get(t.name, t)
    if isinstance(t, RuntimeObj):
        return t
    S = lambda s, a=tm, b=ty: subst(s, a, b)  # noqa: E731
    if isinstance(t, ObjNew):
        ms = []
        for name, x, ax, body in t.methods:
            nx, tm2 = _bind_term(x, [body], tm, ty)
            ms.append((name, nx, _sty(ax, ty), S(body, tm2, ty)))
        return ObjNew(_sty(t.annot, ty), tuple(ms))
    if isinstance(t, Invoke):
        return Invoke(S(t.recv), t.method)
    if isinstance(t, Update):
        nx, tm2 = _bind_term(t.self_var, [t.body], tm, ty)
        return Update(S(t.recv), t.method, nx, _sty(t.self_annot, ty), S(t.body, tm2, ty))
    if isinstance(t, Clone):
        return Clone(S(t.arg))
    if isinstance(t, Lam):
        nx, tm2 = _bind_term(t.var, [t.body], tm, ty)
        return Lam(nx, _sty(t.annot, ty), S(t.body, tm2, ty))
    if isinstance(t, App):
        return App(S(t.fun), S(t.arg))
    if isinstance(t, Fold):
        return Fold(_sty(t.annot, ty), S(t.arg))
    if isinstance(t, Unfold):
        return Unfold(_sty(t.annot, ty), S(t.arg))
    if isinstance(t, TLam):
        nX, ty2 = _bind_type(t.tvar, [t.body], [], tm, ty)
        return TLam(nX, _sty(t.bound, ty), S(t.body, tm, ty2))
    if isinstance(t, TApp):
        return TApp(S(t.fun), _sty(t.targ, ty))
    if isinstance(t, Pack):
        nX, ty2 = _bind_type(t.tvar, [t.payload], [t.body_type], tm, ty)
        return Pack(nX, _sty(t.bound, ty), _sty(t.witness, ty), S(t.payload, tm, ty2), _sty(t.body_type, ty2))
    if isinstance(t, Open):
        nX, ty2 = _bind_type(t.tvar, [t.body], [t.var_type], tm, ty)
        nx, tm2 = _bind_term(t.var, [t.body], tm, ty2)
        return Open(
            S(t.arg),
            nX,
            _sty(t.bound, ty),
            nx,
            _sty(t.var_type, ty2),
            S(t.body, tm2, ty2),
            _sty(t.result_type, ty),
        )
    raise TypeError(f"unknown term {t!r}")  # pragma: no cover


def canon_term(t: Term) -> Term:
    c = t.__dict__.get("_canon")
    if c is None:
        a, b, _ = t.fv
        c = _canon_tm(t, {}, {}, _offset(a | b))
        object.__setattr__(t, "_canon", c)
    return c


def _ct(A: Type, yenv, depth) -> Type:
    if not yenv or not (A.ftv & yenv.keys()):
        return canon_type(A)
    return _canon_ty(A, dict(yenv), depth)


def _canon_tm(t: Term, tenv, yenv, d) -> Term:
    if isinstance(t, Var):
        return Var(tenv.get(t.name, t.name))
    if isinstance(t, RuntimeObj):
        return RuntimeObj(tuple(sorted(t.locs)))
    C = _canon_tm
    if isinstance(t, ObjNew):
        ms = []
        for name, x, ax, body in t.methods:
            ms.append((name, _lvl(d), _ct(ax, yenv, d), C(body, {**tenv, x: _lvl(d)}, yenv, d + 1)))
        ms.sort(key=lambda m: m[0])
        return ObjNew(_ct(t.annot, yenv, d), tuple(ms))
    if isinstance(t, Invoke):
        return Invoke(C(t.recv, tenv, yenv, d), t.method)
    if isinstance(t, Update):
        return Update(
            C(t.recv, tenv, yenv, d),
            t.method,
            _lvl(d),
            _ct(t.self_annot, yenv, d),
            C(t.body, {**tenv, t.self_var: _lvl(d)}, yenv, d + 1),
        )
    if isinstance(t, Clone):
        return Clone(C(t.arg, tenv, yenv, d))
    if isinstance(t, Lam):
        return Lam(_lvl(d), _ct(t.annot, yenv, d), C(t.body, {**tenv, t.var: _lvl(d)}, yenv, d + 1))
    if isinstance(t, App):
        return App(C(t.fun, tenv, yenv, d), C(t.arg, tenv, yenv, d))
    if isinstance(t, Fold):
        return Fold(_ct(t.annot, yenv, d), C(t.arg, tenv, yenv, d))
    if isinstance(t, Unfold):
        return Unfold(_ct(t.annot, yenv, d), C(t.arg, tenv, yenv, d))
    if isinstance(t, TLam):
        y2 = {**yenv, t.tvar: _lvl(d)}
        return TLam(_lvl(d), _ct(t.bound, yenv, d), C(t.body, tenv, y2, d + 1))
    if isinstance(t, TApp):
        return TApp(C(t.fun, tenv, yenv, d), _ct(t.targ, yenv, d))
    if isinstance(t, Pack):
        y2 = {**yenv, t.tvar: _lvl(d)}
        return Pack(
            _lvl(d),
            _ct(t.bound, yenv, d),
            _ct(t.witness, yenv, d),
            C(t.payload, tenv, y2, d + 1),
            _ct(t.body_type, y2, d + 1),
        )
    if isinstance(t, Open):
        y2 = {**yenv, t.tvar: _lvl(d)}
        t2 = {**tenv, t.var: _lvl(d + 1)}
        return Open(
            C(t.arg, tenv, yenv, d),
            _lvl(d),
            _ct(t.bound, yenv, d),
            _lvl(d + 1),
            _ct(t.var_type, y2, d + 1),
            C(t.body, t2, y2, d + 2),
            _ct(t.result_type, yenv, d),
        )
    raise TypeError(f"unknown term {t!r}")  # pragma: no cover


def alpha_eq(a, b) -> bool:
    """Alpha-equivalence of two terms or two types."""
    if a is b:
        return True
    if isinstance(a, Type) and isinstance(b, Type):
        return canon_type(a) == canon_type(b)
    if isinstance(a, Term) and isinstance(b, Term):
        return canon_term(a) == canon_term(b)
    return False


# ---------------------------------------------------------------------------
# Erasure and self types
# ---------------------------------------------------------------------------


def erase_annotations(t: Term) -> Term:
    """Replace every type annotation by Top."""
    E = erase_annotations
    if isinstance(t, (Var, RuntimeObj)):
        return t
    if isinstance(t, ObjNew):
        return ObjNew(TOP, tuple((n, x, TOP, E(b)) for n, x, _, b in t.methods))
    if isinstance(t, Invoke):
        return Invoke(E(t.recv), t.method)
    if isinstance(t, Update):
        return Update(E(t.recv), t.method, t.self_var, TOP, E(t.body))
    if isinstance(t, Clone):
        return Clone(E(t.arg))
    if isinstance(t, Lam):
        return Lam(t.var, TOP, E(t.body))
    if isinstance(t, App):
        return App(E(t.fun), E(t.arg))
    if isinstance(t, Fold):
        return Fold(TOP, E(t.arg))
    if isinstance(t, Unfold):
        return Unfold(TOP, E(t.arg))
    if isinstance(t, TLam):
        return TLam(t.tvar, TOP, E(t.body))
    if isinstance(t, TApp):
        return TApp(E(t.fun), TOP)
    if isinstance(t, Pack):
        return Pack(t.tvar, TOP, TOP, E(t.payload), TOP)
    if isinstance(t, Open):
        return Open(E(t.arg), t.tvar, TOP, t.var, TOP, E(t.body), TOP)
    raise TypeError(f"unknown term {t!r}")  # pragma: no cover


def has_self(A: Type) -> bool:
    if isinstance(A, SelfObj):
        return True
    return any(has_self(k) for k in A.children())


def desugar_self(A: Type) -> Type:
    """Replace every ``Obj(X)[...]`` by ``Mu(Y) Some(X<:Y) [...]``, innermost first."""
    if not has_self(A):
        return A
    kids = tuple(desugar_self(k) for k in A.children())
    if isinstance(A, SelfObj):
        body = ObjV(tuple((n, v, k) for (n, v, _), k in zip(A.methods, kids)))
        avoid = set(body.ftv) | {A.var}
        y = fresh("Y", avoid) if "Y" in avoid else "Y"
        return Mu(y, Some(A.var, TVar(y), body))
    return A.remake(A.binder, kids)


def desugar_self_in_term(t: Term) -> Term:
    """Apply ``desugar_self`` to every annotation of a term."""
    return map_term_types(t, desugar_self)


def map_term_types(t: Term, f) -> Term:
    """Apply ``f`` to every type annotation (binder names unchanged)."""
    M = lambda s: map_term_types(s, f)  # noqa: E731
    if isinstance(t, (Var, RuntimeObj)):
        return t
    if isinstance(t, ObjNew):
        return ObjNew(f(t.annot), tuple((n, x, f(a), M(b)) for n, x, a, b in t.methods))
    if isinstance(t, Invoke):
        return Invoke(M(t.recv), t.method)
    if isinstance(t, Update):
        return Update(M(t.recv), t.method, t.self_var, f(t.self_annot), M(t.body))
    if isinstance(t, Clone):
        return Clone(M(t.arg))
    if isinstance(t, Lam):
        return Lam(t.var, f(t.annot), M(t.body))
    if isinstance(t, App):
        return App(M(t.fun), M(t.arg))
    if isinstance(t, Fold):
        return Fold(f(t.annot), M(t.arg))
    if isinstance(t, Unfold):
        return Unfold(f(t.annot), M(t.arg))
    if isinstance(t, TLam):
        return TLam(t.tvar, f(t.bound), M(t.body))
    if isinstance(t, TApp):
        return TApp(M(t.fun), f(t.targ))
    if isinstance(t, Pack):
        return Pack(t.tvar, f(t.bound), f(t.witness), M(t.payload), f(t.body_type))
    if isinstance(t, Open):
        return Open(M(t.arg), t.tvar, f(t.bound), t.var, f(t.var_type), M(t.body), f(t.result_type))
    raise TypeError(f"unknown term {t!r}")  # pragma: no cover


def term_types(t: Term):
    """Yield every type annotation occurring in t."""
    out = []
    map_term_types(t, lambda A: (out.append(A), A)[1])
    return out
