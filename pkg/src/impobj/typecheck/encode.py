"""Variance annotations expressed as (write, read) pairs."""
from __future__ import annotations

from ..syntax.ast import BOT, TOP, ObjSplit, ObjV, Type
from ..syntax.binding import desugar_self


def encode_variance(v: str, A: Type):
    """inv A ↦ (A, A), cov A ↦ (Bot, A), con A ↦ (A, Top)."""
    if v == "inv":
        return A, A
    if v == "cov":
        return BOT, A
    if v == "con":
        return A, TOP
    raise ValueError(f"unknown variance {v!r}")


def encode_to_split(A: Type, strict: bool = True) -> Type:
    """Replace every variance-annotated object type by its split form.

    With ``strict`` an existing split object type is an error; otherwise it
    is kept (its components are still encoded).
    """
    return _enc(desugar_self(A), strict)


def _enc(A: Type, strict: bool) -> Type:
    if isinstance(A, ObjSplit) and strict:
        raise ValueError("encode_to_split expects no split object types")
    if isinstance(A, ObjV):
        out = []
        for n, v, t in A.methods:
            w, r = encode_variance(v, _enc(t, strict))
            out.append((n, w, r))
        return ObjSplit(tuple(out))
    kids = A.children()
    if not kids:
        return A
    return A.remake(A.binder, tuple(_enc(k, strict) for k in kids))
