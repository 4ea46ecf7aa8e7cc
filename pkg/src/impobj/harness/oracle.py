"""Brute-force declarative subtyping oracle.

The declarative rules, including free-standing reflexivity and transitivity,
are closed level by level over the enumerated universe.  ``R[i][d]`` is the
boolean matrix of judgments at context level ``i`` that have a derivation of
height at most ``d``; transitivity is a boolean matrix product, so its cut
types range over the whole level.  A recursive-type premise at level ``i``
reads the matrix of level ``i + 1``, whose context adds ``Y<:Top, X<:Y``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..syntax.ast import VARIANCES, Arrow, Bot, Mu, ObjV, Top, TVar, Type
from ..syntax.binding import canon_type, subst_type
from .universe import METHOD_NAMES, level_vars, load_manifest

_VCODE = {v: i for i, v in enumerate(VARIANCES)}  # inv=0, cov=1, con=2


@dataclass
class _Level:
    types: Sequence[Type]
    index: Dict[Type, int]
    axioms: np.ndarray
    arrows: np.ndarray
    arr_dom: np.ndarray
    arr_cod: np.ndarray
    objs: np.ndarray
    obj_pres: np.ndarray  # (names, O) bool
    obj_var: np.ndarray  # (names, O) int
    obj_ty: np.ndarray  # (names, O) int
    mus: np.ndarray
    mu_left: np.ndarray  # body index at level i+1 with the bound variable as X_{i+1}
    mu_right: np.ndarray  # ... as Y_{i+1}


class DeclarativeOracle:
    def __init__(self, levels: Optional[Sequence[Sequence[Type]]] = None, names: Sequence[str] = METHOD_NAMES):
        levels = levels if levels is not None else load_manifest()
        self.names = tuple(names)
        self.levels: List[_Level] = []
        for i, tys in enumerate(levels):
            self.levels.append(self._prepare(i, tys))
        for i, lv in enumerate(self.levels):
            if len(lv.mus):
                nxt = self.levels[i + 1].index
                xs, ys = f"X{i + 1}", f"Y{i + 1}"
                left, right = [], []
                for k in lv.mus:
                    M = lv.types[k]
                    left.append(nxt[canon_type(subst_type(M.body, M.var, TVar(xs)))])
                    right.append(nxt[canon_type(subst_type(M.body, M.var, TVar(ys)))])
                lv.mu_left = np.array(left, dtype=np.int64)
                lv.mu_right = np.array(right, dtype=np.int64)
        self._history: List[List[np.ndarray]] = [[np.zeros((len(lv.types),) * 2, dtype=bool)] for lv in self.levels]

    def _prepare(self, i: int, tys: Sequence[Type]) -> _Level:
        n = len(tys)
        index = {canon_type(t): k for k, t in enumerate(tys)}
        ax = np.zeros((n, n), dtype=bool)
        np.fill_diagonal(ax, True)  # SubRefl
        arrows, doms, cods, objs, mus = [], [], [], [], []
        for k, t in enumerate(tys):
            if isinstance(t, Top):
                ax[:, k] = True  # SubTop
            elif isinstance(t, Bot):
                ax[k, :] = True  # SubBot
            elif isinstance(t, Arrow):
                arrows.append(k)
                doms.append(index[canon_type(t.dom)])
                cods.append(index[canon_type(t.cod)])
            elif isinstance(t, ObjV):
                objs.append(k)
            elif isinstance(t, Mu):
                mus.append(k)
        vs = level_vars(i)
        for j in range(0, len(vs), 2):  # SubVar: X_j <: Y_j
            y, x = vs[j], vs[j + 1]
            ax[index[TVar(x)], index[TVar(y)]] = True
        nn = len(self.names)
        pres = np.zeros((nn, len(objs)), dtype=bool)
        var = np.zeros((nn, len(objs)), dtype=np.int64)
        ty = np.zeros((nn, len(objs)), dtype=np.int64)
        groups: Dict[tuple, List[int]] = {}
        for o, k in enumerate(objs):
            t = tys[k]
            for a, name in enumerate(self.names):
                m = t.method(name)
                if m is not None:
                    pres[a, o] = True
                    var[a, o] = _VCODE[m[0]]
                    ty[a, o] = index[canon_type(m[1])]
            key = tuple((name, canon_type(T)) for name, _, T in sorted(t.methods))
            groups.setdefault(key, []).append(k)
        # SubObjVar: same methods and types, each source annotation inv or equal.
        for members in groups.values():
            for a in members:
                va = {name: v for name, v, _ in tys[a].methods}
                for b in members:
                    if all(va[name] == "inv" or va[name] == vb for name, vb, _ in tys[b].methods):
                        ax[a, b] = True
        empty = np.zeros(0, dtype=np.int64)
        return _Level(
            tys, index, ax,
            np.array(arrows, dtype=np.int64), np.array(doms, dtype=np.int64), np.array(cods, dtype=np.int64),
            np.array(objs, dtype=np.int64), pres, var, ty,
            np.array(mus, dtype=np.int64), empty, empty,
        )

    def _step(self, i: int, R: np.ndarray, Rnext: Optional[np.ndarray]) -> np.ndarray:
        lv = self.levels[i]
        out = lv.axioms.copy()
        f = R.astype(np.float32)
        out |= (f @ f) > 0  # SubTrans
        if len(lv.arrows):  # SubProc
            sub = R[np.ix_(lv.arr_dom, lv.arr_dom)].T & R[np.ix_(lv.arr_cod, lv.arr_cod)]
            out[np.ix_(lv.arrows, lv.arrows)] |= sub
        if len(lv.objs):  # SubObj: E ⊆ D, equal annotations, depth by variance
            ok = np.ones((len(lv.objs),) * 2, dtype=bool)
            for a in range(len(self.names)):
                pa, va, ta = lv.obj_pres[a], lv.obj_var[a], lv.obj_ty[a]
                co = R[np.ix_(ta, ta)]
                contra = co.T
                same = va[:, None] == va[None, :]
                vb = va[None, :]
                need_co = (vb == 0) | (vb == 1)
                need_contra = (vb == 0) | (vb == 2)
                good = pa[:, None] & same & (~need_co | co) & (~need_contra | contra)
                ok &= ~pa[None, :] | good
            out[np.ix_(lv.objs, lv.objs)] |= ok
        if len(lv.mus) and Rnext is not None:  # SubRec
            out[np.ix_(lv.mus, lv.mus)] |= Rnext[np.ix_(lv.mu_left, lv.mu_right)]
        return out

    def run_to(self, depth: int) -> None:
        while len(self._history[0]) <= depth:
            prev = [h[-1] for h in self._history]
            for i in range(len(self.levels)):
                nxt = prev[i + 1] if i + 1 < len(self.levels) else None
                self._history[i].append(self._step(i, prev[i], nxt))

    def matrix(self, depth: int = 8, level: int = 0) -> np.ndarray:
        self.run_to(depth)
        return self._history[level][depth]

    def holds(self, A: Type, B: Type, depth: int = 8) -> bool:
        idx = self.levels[0].index
        try:
            a, b = idx[canon_type(A)], idx[canon_type(B)]
        except KeyError:
            raise ValueError("types outside the enumerated universe") from None
        return bool(self.matrix(depth)[a, b])


_DEFAULT: Optional[DeclarativeOracle] = None


def default_oracle() -> DeclarativeOracle:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = DeclarativeOracle()
    return _DEFAULT


def declarative_subtype_oracle(ctx, A: Type, B: Type, max_depth: int = 8) -> bool:
    """True iff ``A <: B`` has a declarative derivation of height at most ``max_depth``.

    Only the empty context is supported; both types must lie in the closed
    universe.
    """
    if ctx is not None and len(ctx):
        raise ValueError("the oracle works over the empty context only")
    return default_oracle().holds(A, B, max_depth)
