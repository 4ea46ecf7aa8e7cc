"""Recursive-descent parser for the concrete grammar.

Types::

    A ::= Top | Bot | X | (A) | A -> A | [m: inv A, ...] | [m: (W, R), ...]
        | Mu(X) A | mu X. A | All(X<:A) A | Some(X<:A) A | Obj(X)[m: inv A, ...]

Terms::

    a ::= x | (a) | a b | a.m | a.m := ς(x:A) b | a[A] | clone(a)
        | obj A { m = ς(x:A) b, ... } | λ(x:A) b | fold[A] a | unfold[A] a
        | Fun(X<:A) b | pack<X<:A=C, a : B> | open a as <X<:A, x:B> in b : C
        | let x (: A)? = a in b | {m = l0, ...}

``\\`` is accepted for λ and ``self`` for ς; binder bodies extend as far
right as possible.  ``//`` starts a line comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Tuple

from .ast import (
    BOT,
    TOP,
    VARIANCES,
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
    TLam,
    Term,
    TVar,
    Type,
    Unfold,
    Update,
    Var,
)
from .pretty import KEYWORDS


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int, expected: Tuple[str, ...] = ()):
        self.msg = msg
        self.line = line
        self.col = col
        self.expected = expected
        exp = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{line}:{col}: {msg}{exp}")


@dataclass
class Tok:
    kind: str  # "id", "loc", "sym", "eof"
    text: str
    line: int
    col: int


_SYMS = ["->", "<:", ":=", "→", "λ", "ς", "μ", "∀", "∃", "⊤", "⊥", "\\"] + list("()[]{}<>.,:=")
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>//[^\n]*)|(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>"
    + "|".join(re.escape(s) for s in _SYMS)
    + ")"
)
_ALIASES = {"→": "->", "\\": "λ", "⊤": "Top", "⊥": "Bot"}


def tokenize(text: str) -> List[Tok]:
    toks: List[Tok] = []
    pos, line, lstart = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        s = m.group()
        if kind in ("id", "sym"):
            s2 = _ALIASES.get(s, s)
            k = "id" if s2 in ("Top", "Bot") else kind
            toks.append(Tok(k, s2, line, pos - lstart + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            lstart = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "<end of input>", line, pos - lstart + 1))
    return toks


_LOC_RE = re.compile(r"l(\d+)\Z")


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers -----------------------------------------------------
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, n: int = 1) -> Tok:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind != "eof" and t.text in texts

    def error(self, msg: str, *expected: str):
        t = self.tok
        raise ParseError(f"{msg}, found {t.text!r}", t.line, t.col, tuple(expected))

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.error(f"expected {text!r}", text)
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind != "id" or t.text in KEYWORDS:
            self.error(f"expected {what}", what)
        self.i += 1
        return t.text

    def end(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input", "<end of input>")

    # -- types -------------------------------------------------------------
    def type_(self) -> Type:
        t = self.tok
        if t.text == "Mu" and self.peek().text == "(":
            self.i += 1
            self.expect("(")
            x = self.ident("type variable")
            self.expect(")")
            return Mu(x, self.type_())
        if t.text in ("mu", "μ"):
            self.i += 1
            x = self.ident("type variable")
            self.expect(".")
            return Mu(x, self.type_())
        if t.text in ("All", "Some", "∀", "∃") and self.peek().text == "(":
            self.i += 1
            self.expect("(")
            x = self.ident("type variable")
            self.expect("<:")
            bound = self.type_()
            self.expect(")")
            body = self.type_()
            return (All if t.text in ("All", "∀") else Some)(x, bound, body)
        left = self.atype()
        if self.accept("->"):
            return Arrow(left, self.type_())
        return left

    def atype(self) -> Type:
        t = self.tok
        if t.kind == "id" and t.text == "Top":
            self.i += 1
            return TOP
        if t.kind == "id" and t.text == "Bot":
            self.i += 1
            return BOT
        if t.text == "(":
            self.i += 1
            A = self.type_()
            self.expect(")")
            return A
        if t.text == "[":
            return self.obj_type()
        if t.text == "Obj" and self.peek().text == "(":
            self.i += 1
            self.expect("(")
            x = self.ident("type variable")
            self.expect(")")
            A = self.obj_type()
            if not isinstance(A, ObjV):
                raise ParseError("self types need variance annotations", t.line, t.col)
            return SelfObj(x, A.methods)
        if t.kind == "id" and t.text not in KEYWORDS:
            self.i += 1
            return TVar(t.text)
        self.error("expected a type", "Top", "Bot", "type variable", "(", "[", "Mu", "All", "Some", "Obj")

    def obj_type(self) -> Type:
        start = self.expect("[")
        vms, sms, names = [], [], set()
        if not self.at("]"):
            while True:
                nt = self.tok
                name = self.ident("method name")
                if name in names:
                    raise ParseError(f"duplicate method name {name!r}", nt.line, nt.col)
                names.add(name)
                self.expect(":")
                if self.accept("("):
                    w = self.type_()
                    self.expect(",")
                    r = self.type_()
                    self.expect(")")
                    sms.append((name, w, r))
                elif self.tok.text in VARIANCES:
                    v = self.tok.text
                    self.i += 1
                    vms.append((name, v, self.type_()))
                else:
                    self.error("expected a variance or a (write, read) pair", "inv", "cov", "con", "(")
                if not self.accept(","):
                    break
        self.expect("]")
        if vms and sms:
            raise ParseError("cannot mix variance and split methods", start.line, start.col)
        return ObjSplit(tuple(sms)) if sms else ObjV(tuple(vms))

    # -- terms -------------------------------------------------------------
    _BINDER_STARTS = ("λ", "Fun", "let", "open")

    def term(self) -> Term:
        t = self.tok
        if t.text == "λ":
            self.i += 1
            self.expect("(")
            x = self.ident("variable")
            self.expect(":")
            A = self.type_()
            self.expect(")")
            return Lam(x, A, self.term())
        if t.text == "Fun" and self.peek().text == "(":
            self.i += 1
            self.expect("(")
            X = self.ident("type variable")
            self.expect("<:")
            A = self.type_()
            self.expect(")")
            return TLam(X, A, self.term())
        if t.text == "let":
            self.i += 1
            x = self.ident("variable")
            A = self.type_() if self.accept(":") else TOP
            self.expect("=")
            a = self.term()
            self.expect("in")
            b = self.term()
            return App(Lam(x, A, b), a)
        if t.text == "open":
            self.i += 1
            a = self.term()
            self.expect("as")
            self.expect("<")
            X = self.ident("type variable")
            self.expect("<:")
            A = self.type_()
            self.expect(",")
            x = self.ident("variable")
            self.expect(":")
            B = self.type_()
            self.expect(">")
            self.expect("in")
            b = self.term()
            self.expect(":")
            C = self.type_()
            return Open(a, X, A, x, B, b, C)
        return self.app()

    def app(self) -> Term:
        f = self.unary()
        while True:
            if isinstance(f, Update):
                return f
            if self.at(*self._BINDER_STARTS):
                return App(f, self.term())
            if not self.starts_atom():
                return f
            f = App(f, self.unary())

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "eof":
            return False
        if t.text in ("(", "{", "obj", "clone", "pack", "fold", "unfold"):
            return True
        return t.kind == "id" and t.text not in KEYWORDS

    def unary(self) -> Term:
        if self.at("fold", "unfold"):
            kw = self.tok.text
            self.i += 1
            self.expect("[")
            A = self.type_()
            self.expect("]")
            arg = self.term() if self.at(*self._BINDER_STARTS) else self.unary()
            return Fold(A, arg) if kw == "fold" else Unfold(A, arg)
        return self.postfix()

    def sigma(self, default: Type) -> Tuple[str, Type, Term]:
        if not self.at("ς", "self"):
            self.error("expected a self binder", "ς", "self")
        self.i += 1
        self.expect("(")
        x = self.ident("variable")
        A = self.type_() if self.accept(":") else default
        self.expect(")")
        return x, A, self.term()

    def postfix(self) -> Term:
        a = self.atom()
        while True:
            if self.at("."):
                self.i += 1
                m = self.ident("method name")
                if self.accept(":="):
                    x, A, b = self.sigma(TOP)
                    return Update(a, m, x, A, b)
                a = Invoke(a, m)
            elif self.at("["):
                self.i += 1
                A = self.type_()
                self.expect("]")
                a = TApp(a, A)
            else:
                return a

    def atom(self) -> Term:
        t = self.tok
        if t.text == "(":
            self.i += 1
            a = self.term()
            self.expect(")")
            return a
        if t.text == "clone":
            self.i += 1
            self.expect("(")
            a = self.term()
            self.expect(")")
            return Clone(a)
        if t.text == "obj":
            self.i += 1
            A = TOP if self.at("{") else self.type_()
            self.expect("{")
            ms, names = [], set()
            if not self.at("}"):
                while True:
                    nt = self.tok
                    name = self.ident("method name")
                    if name in names:
                        raise ParseError(f"duplicate method name {name!r}", nt.line, nt.col)
                    names.add(name)
                    self.expect("=")
                    x, ax, b = self.sigma(A)
                    ms.append((name, x, ax, b))
                    if not self.accept(","):
                        break
            self.expect("}")
            return ObjNew(A, tuple(ms))
        if t.text == "{":
            self.i += 1
            locs, names = [], set()
            if not self.at("}"):
                while True:
                    nt = self.tok
                    name = self.ident("method name")
                    if name in names:
                        raise ParseError(f"duplicate method name {name!r}", nt.line, nt.col)
                    names.add(name)
                    self.expect("=")
                    lt = self.tok
                    m = _LOC_RE.match(lt.text) if lt.kind == "id" else None
                    if not m:
                        self.error("expected a location", "l0")
                    self.i += 1
                    locs.append((name, int(m.group(1))))
                    if not self.accept(","):
                        break
            self.expect("}")
            return RuntimeObj(tuple(locs))
        if t.text == "pack":
            self.i += 1
            self.expect("<")
            X = self.ident("type variable")
            self.expect("<:")
            A = self.type_()
            self.expect("=")
            C = self.type_()
            self.expect(",")
            a = self.term()
            self.expect(":")
            B = self.type_()
            self.expect(">")
            return Pack(X, A, C, a, B)
        if t.kind == "id" and t.text not in KEYWORDS:
            self.i += 1
            return Var(t.text)
        self.error("expected a term", "variable", "(", "obj", "clone", "pack", "λ", "fold", "unfold", "Fun", "let", "open")


def parse_type(text: str) -> Type:
    p = Parser(text)
    A = p.type_()
    p.end()
    return A


def parse_term(text: str) -> Term:
    p = Parser(text)
    a = p.term()
    p.end()
    return a
