"""The enumerated subtyping universe and its manifest file.

Level ``i`` holds every type of size at most ``max_size - i`` built from
Top, Bot, arrows, object types over two method names and a single
recursive-type variable ``X``, with the free variables ``Y1, X1, ..., Yi, Xi``
introduced by ``i`` nested recursive-type comparisons.  Level 0 is the closed
universe swept against the algorithm; deeper levels hold the bodies that
recursive-type premises compare.

Size counts nodes: Top, Bot, variables and ``[]`` have size 1, and an arrow,
object type or recursive type adds 1 to the sizes of its components.
"""
from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from ..syntax.ast import BOT, TOP, VARIANCES, Arrow, Mu, ObjV, TVar, Type
from ..syntax.binding import canon_type
from ..syntax.parser import parse_type
from ..syntax.pretty import print_type

MAX_SIZE = 4
METHOD_NAMES = ("m", "n")
MU_VAR = "X"
MANIFEST_NAME = "universe_manifest.txt"


def level_vars(i: int) -> Tuple[str, ...]:
    out: List[str] = []
    for j in range(1, i + 1):
        out += [f"Y{j}", f"X{j}"]
    return tuple(out)


def _gen(s: int, V: frozenset, names: Tuple[str, ...]) -> Tuple[Type, ...]:
    @lru_cache(maxsize=None)
    def g(s: int, V: frozenset) -> Tuple[Type, ...]:
        if s == 1:
            return (TOP, BOT, ObjV(())) + tuple(TVar(v) for v in sorted(V))
        out: List[Type] = []
        for a in range(1, s - 1):
            for A in g(a, V):
                for B in g(s - 1 - a, V):
                    out.append(Arrow(A, B))
        for n in names:
            for v in VARIANCES:
                for A in g(s - 1, V):
                    out.append(ObjV(((n, v, A),)))
        if len(names) >= 2:
            for a in range(1, s - 1):
                for va in VARIANCES:
                    for vb in VARIANCES:
                        for A in g(a, V):
                            for B in g(s - 1 - a, V):
                                out.append(ObjV(((names[0], va, A), (names[1], vb, B))))
        for B in g(s - 1, V | {MU_VAR}):
            out.append(Mu(MU_VAR, B))
        return tuple(out)

    return g(s, V)


def enumerate_level(i: int, max_size: int = MAX_SIZE, names: Sequence[str] = METHOD_NAMES) -> List[Type]:
    V = frozenset(level_vars(i))
    out: List[Type] = []
    seen = set()
    for s in range(1, max_size - i + 1):
        for t in _gen(s, V, tuple(names)):
            c = canon_type(t)
            if c not in seen:
                seen.add(c)
                out.append(t)
    return out


def enumerate_universe(max_size: int = MAX_SIZE, names: Sequence[str] = METHOD_NAMES) -> List[List[Type]]:
    """All levels, from the closed universe (level 0) to the deepest nonempty one."""
    return [enumerate_level(i, max_size, names) for i in range(max_size)]


def render_manifest(levels: List[List[Type]]) -> str:
    body = "".join(f"{i}\t{print_type(t)}\n" for i, lvl in enumerate(levels) for t in lvl)
    digest = hashlib.sha256(body.encode()).hexdigest()
    counts = ",".join(str(len(lvl)) for lvl in levels)
    return f"# subtyping universe max_size={MAX_SIZE} names={','.join(METHOD_NAMES)} counts={counts} sha256={digest}\n" + body


def manifest_path() -> Path:
    return Path(str(resources.files("impobj.harness").joinpath(MANIFEST_NAME)))


def write_manifest(path=None) -> Path:
    path = Path(path) if path else manifest_path()
    path.write_text(render_manifest(enumerate_universe()), encoding="utf-8")
    return path


@lru_cache(maxsize=4)
def load_manifest(path=None) -> Tuple[Tuple[Type, ...], ...]:
    """Read the levels back; the checksum in the header must match the body."""
    text = Path(path or manifest_path()).read_text(encoding="utf-8")
    header, _, body = text.partition("\n")
    digest = header.rsplit("sha256=", 1)[1].strip()
    if hashlib.sha256(body.encode()).hexdigest() != digest:
        raise ValueError("universe manifest checksum mismatch")
    levels: Dict[int, List[Type]] = {}
    for line in body.splitlines():
        lvl, _, src = line.partition("\t")
        levels.setdefault(int(lvl), []).append(parse_type(src))
    return tuple(tuple(levels.get(i, ())) for i in range(max(levels) + 1))


def closed_universe() -> Tuple[Type, ...]:
    return load_manifest()[0]
