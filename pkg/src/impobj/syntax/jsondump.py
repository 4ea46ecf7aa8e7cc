"""Machine-readable AST dump: one JSON object per node with a ``kind`` tag."""
from __future__ import annotations

import dataclasses
from typing import Any

from .ast import Node, ObjNew, ObjSplit, ObjV, SelfObj


def to_json(node: Any) -> Any:
    if isinstance(node, Node):
        out = {"kind": type(node).__name__}
        for f in dataclasses.fields(node):
            val = getattr(node, f.name)
            if f.name == "methods":
                out[f.name] = [_method(node, m) for m in val]
            elif f.name == "locs":
                out[f.name] = [{"name": n, "loc": l} for n, l in val]
            else:
                out[f.name] = to_json(val)
        return out
    if isinstance(node, tuple):
        return [to_json(x) for x in node]
    return node


def _method(owner: Node, m: tuple) -> dict:
    if isinstance(owner, (ObjV, SelfObj)):
        n, v, t = m
        return {"name": n, "variance": v, "type": to_json(t)}
    if isinstance(owner, ObjSplit):
        n, w, r = m
        return {"name": n, "write": to_json(w), "read": to_json(r)}
    if isinstance(owner, ObjNew):
        n, x, a, b = m
        return {"name": n, "self": x, "self_annot": to_json(a), "body": to_json(b)}
    raise TypeError(f"unexpected method owner {owner!r}")  # pragma: no cover


__all__ = ["to_json"]
