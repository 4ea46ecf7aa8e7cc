"""Pretty printer.  Output re-parses to an alpha-equivalent tree.

Binders that shadow an enclosing binder, or whose names are not valid
identifiers (such as the ``#n`` names of canonical forms), are renamed.
"""
from __future__ import annotations

import re
from typing import Dict, Set

from .ast import (
    All,
    App,
    Arrow,
    Bot,
    Clone,
    Fold,
    Invoke,
    Lam,
    Mu,
    Node,
    ObjNew,
    ObjSplit,
    ObjV,
    Open,
    Pack,
    RuntimeObj,
    SelfObj,
    Some,
    TApp,
    TLam,
    Term,
    Top,
    TVar,
    Type,
    Unfold,
    Update,
    Var,
    loc_name,
)

KEYWORDS = frozenset(
    "obj clone fold unfold let in open as pack Fun Top Bot Mu mu All Some Obj inv cov con self".split()
)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


def valid_ident(name: str) -> bool:
    return bool(_IDENT.match(name)) and name not in KEYWORDS


class _Scope:
    """Printed names of bound variables; term and type names are separate."""

    def __init__(self, taken_terms: Set[str], taken_types: Set[str]):
        self.taken = {"t": set(taken_terms), "y": set(taken_types)}
        self.env: Dict[str, Dict[str, str]] = {"t": {}, "y": {}}

    def bind(self, name: str, default: str, kind: str = "y"):
        """Returns (printed name, restore info)."""
        env = self.env[kind]
        taken = self.taken[kind]
        old = env.get(name)
        in_scope = set(env.values())
        new = name
        if not valid_ident(name) or name in in_scope:
            base = default if not valid_ident(name) else name.rstrip("'")
            base = re.sub(r"\d+$", "", base) or default
            i = 1
            new = base if base not in in_scope and base not in taken else f"{base}{i}"
            while new in in_scope or new in taken or not valid_ident(new):
                i += 1
                new = f"{base}{i}"
        env[name] = new
        return new, (kind, name, old)

    def unbind(self, info):
        kind, name, old = info
        if old is None:
            del self.env[kind][name]
        else:
            self.env[kind][name] = old

    def name(self, n: str, kind: str = "y") -> str:
        return self.env[kind].get(n, n)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


def _ty(A: Type, sc: _Scope, prec: int) -> str:
    """prec 0: anywhere; 1: left of an arrow (binders and arrows need parens)."""
    if isinstance(A, TVar):
        return sc.name(A.name)
    if isinstance(A, Top):
        return "Top"
    if isinstance(A, Bot):
        return "Bot"
    if isinstance(A, Arrow):
        s = f"{_ty(A.dom, sc, 1)} -> {_ty(A.cod, sc, 0)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(A, ObjV):
        return "[" + ", ".join(f"{n}:{v} {_ty(t, sc, 0)}" for n, v, t in A.methods) + "]"
    if isinstance(A, ObjSplit):
        return "[" + ", ".join(f"{n}:({_ty(w, sc, 0)}, {_ty(r, sc, 0)})" for n, w, r in A.methods) + "]"
    if isinstance(A, SelfObj):
        x, info = sc.bind(A.var, "X")
        s = f"Obj({x})[" + ", ".join(f"{n}:{v} {_ty(t, sc, 0)}" for n, v, t in A.methods) + "]"
        sc.unbind(info)
        return s
    if isinstance(A, Mu):
        x, info = sc.bind(A.var, "X")
        s = f"Mu({x}) {_ty(A.body, sc, 0)}"
        sc.unbind(info)
        return f"({s})" if prec >= 1 else s
    if isinstance(A, (All, Some)):
        kw = "All" if isinstance(A, All) else "Some"
        bound = _ty(A.bound, sc, 0)
        x, info = sc.bind(A.var, "X")
        s = f"{kw}({x}<:{bound}) {_ty(A.body, sc, 0)}"
        sc.unbind(info)
        return f"({s})" if prec >= 1 else s
    custom = getattr(A, "render", None)
    if custom is not None:
        # type-like nodes defined elsewhere print their children through us
        return custom(lambda T, p=0: _ty(T, sc, p), sc)
    raise TypeError(f"cannot print {A!r}")


def print_type(A: Type) -> str:
    return _ty(A, _Scope(set(), A.ftv), 0)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

# precedence levels: 0 binder forms, 1 application, 2 fold/unfold, 3 postfix, 4 atoms


def _paren(s: str, level: int, need: int) -> str:
    return f"({s})" if level < need else s


def _sigma(x: str, A: Type, body: Term, sc: _Scope) -> str:
    ann = _ty(A, sc, 0)
    nx, info = sc.bind(x, "s", "t")
    s = f"ς({nx}:{ann}) {_tm(body, sc, 0)}"
    sc.unbind(info)
    return s


def _tm(t: Term, sc: _Scope, need: int) -> str:
    if isinstance(t, Var):
        return sc.name(t.name, "t")
    if isinstance(t, RuntimeObj):
        return "{" + ", ".join(f"{n} = {loc_name(l)}" for n, l in t.locs) + "}"
    if isinstance(t, ObjNew):
        ann = _ty(t.annot, sc, 0)
        ms = ", ".join(f"{n} = {_sigma(x, A, b, sc)}" for n, x, A, b in t.methods)
        return f"obj {ann} {{{ms}}}"
    if isinstance(t, Clone):
        return f"clone({_tm(t.arg, sc, 0)})"
    if isinstance(t, Pack):
        bound = _ty(t.bound, sc, 0)
        wit = _ty(t.witness, sc, 0)
        x, info = sc.bind(t.tvar, "X")
        s = f"pack<{x}<:{bound}={wit}, {_tm(t.payload, sc, 0)} : {_ty(t.body_type, sc, 0)}>"
        sc.unbind(info)
        return s
    if isinstance(t, Invoke):
        return _paren(f"{_tm(t.recv, sc, 3)}.{t.method}", 3, need)
    if isinstance(t, TApp):
        return _paren(f"{_tm(t.fun, sc, 3)}[{_ty(t.targ, sc, 0)}]", 3, need)
    if isinstance(t, (Fold, Unfold)):
        kw = "fold" if isinstance(t, Fold) else "unfold"
        return _paren(f"{kw}[{_ty(t.annot, sc, 0)}] {_tm(t.arg, sc, 2)}", 2, need)
    if isinstance(t, App):
        return _paren(f"{_tm(t.fun, sc, 1)} {_tm(t.arg, sc, 2)}", 1, need)
    if isinstance(t, Lam):
        ann = _ty(t.annot, sc, 0)
        x, info = sc.bind(t.var, "x", "t")
        s = f"λ({x}:{ann}) {_tm(t.body, sc, 0)}"
        sc.unbind(info)
        return _paren(s, 0, need)
    if isinstance(t, TLam):
        bound = _ty(t.bound, sc, 0)
        x, info = sc.bind(t.tvar, "X")
        s = f"Fun({x}<:{bound}) {_tm(t.body, sc, 0)}"
        sc.unbind(info)
        return _paren(s, 0, need)
    if isinstance(t, Update):
        recv = _tm(t.recv, sc, 3)
        s = f"{recv}.{t.method} := {_sigma(t.self_var, t.self_annot, t.body, sc)}"
        return _paren(s, 0, need)
    if isinstance(t, Open):
        arg = _tm(t.arg, sc, 0)
        bound = _ty(t.bound, sc, 0)
        res = _ty(t.result_type, sc, 0)
        X, i1 = sc.bind(t.tvar, "X")
        vt = _ty(t.var_type, sc, 0)
        x, i2 = sc.bind(t.var, "x", "t")
        body = _tm(t.body, sc, 0)
        sc.unbind(i2)
        sc.unbind(i1)
        s = f"open {arg} as <{X}<:{bound}, {x}:{vt}> in {body} : {res}"
        return _paren(s, 0, need)
    raise TypeError(f"cannot print {t!r}")


def print_term(t: Term) -> str:
    a, b, _ = t.fv
    return _tm(t, _Scope(a, b), 0)


def show(node: Node) -> str:
    if isinstance(node, Type):
        return print_type(node)
    if isinstance(node, Term):
        return print_term(node)
    return repr(node)
