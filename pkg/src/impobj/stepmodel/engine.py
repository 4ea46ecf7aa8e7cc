"""Bounded membership engine for the step-indexed semantic types.

Every check is indexed by a natural number ``k`` and recursive calls go to
strictly smaller indices (or to a strictly smaller code at the same index),
so the recursion terminates.  Quantifiers over future states, argument
values, witness types and heaps are finitized by the budget's catalogs;
results are three-valued ``Verdict``s.
"""
from __future__ import annotations

import random
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..eval import Config, rename_locs, run
from ..syntax.ast import (
    BOT,
    TOP,
    All,
    Arrow,
    Bot,
    Fold,
    Invoke,
    Lam,
    Mu,
    ObjNew,
    ObjV,
    Pack,
    RuntimeObj,
    SelfObj,
    Some,
    Term,
    TLam,
    Top,
    TVar,
    Type,
    Var,
    is_value,
)
from ..syntax.binding import canon_type, subst, subst_type, subst_type_in_term
from ..syntax.pretty import print_term
from .codes import (
    OBJECT_CODES,
    LocVal,
    RecRec,
    Ref,
    RefSplit,
    approx_code,
    ceiling,
    method_ref,
    rec_record,
    ref_bounds,
    show_code,
    strip,
    unroll,
)
from .verdict import (
    COUNTEREXAMPLE,
    EMPTY_PSI,
    HOLDS,
    INCONCLUSIVE,
    Budget,
    H,
    Psi,
    Verdict,
    ce,
    inconclusive,
)

_BAD = ObjV((("w", "inv", BOT),))
# obj{w = ς(s) s.w}.w never reaches an irreducible configuration
OMEGA = Invoke(ObjNew(_BAD, (("w", "s", _BAD, Invoke(Var("s"), "w")),)), "w")
SYNTH_DEPTH = 3


class IndexGaugeError(AssertionError):
    """A nested term check did not decrease the step index."""


def all_of(results: Iterable[Verdict]) -> Verdict:
    """Conjunction: the first counterexample wins, then any inconclusive part."""
    pending = None
    for r in results:
        if r.kind == COUNTEREXAMPLE:
            return r
        if r.kind == INCONCLUSIVE and pending is None:
            pending = r
    return pending or H


def any_of(results: Iterable[Verdict], why: str, **at) -> Verdict:
    """Existential over a finite candidate list."""
    pending = None
    first = None
    for r in results:
        if r.kind == HOLDS:
            return H
        if r.kind == INCONCLUSIVE:
            pending = pending or r
        elif first is None:
            first = r
    if pending is not None:
        return pending
    return ce(why, first, **at)


def _empty(c: Type) -> bool:
    return isinstance(strip(c), Bot) or ceiling(c) == 0


def _closed(A: Type) -> bool:
    return not A.ftv


class Engine:
    """Memoizing checker bound to one budget."""

    def __init__(self, budget: Optional[Budget] = None):
        self.budget = budget or Budget()
        self._sub: Dict[tuple, bool] = {}
        self._mv: Dict[tuple, Verdict] = {}
        self._mt: Dict[tuple, Verdict] = {}
        self._ht: Dict[tuple, Verdict] = {}
        self._heaps: Dict[tuple, list] = {}
        self._inh: Dict[Type, tuple] = {}
        self._gauge: List[int] = []
        self.calls = {"subset": 0, "mem_value": 0, "mem_term": 0, "heap_typed": 0, "runs": 0}
        self._big = self.budget.k_max + 3

    # ------------------------------------------------------------------
    # Inclusion between approximated codes
    # ------------------------------------------------------------------

    def subset(self, A: Type, B: Type, k: int, ctx: Tuple[Tuple[str, Type], ...] = ()) -> bool:
        """Decide ``⌊A⌋_k ⊆ ⌊B⌋_k`` structurally.

        Every rule is a valid inclusion; a negative answer is exact for the
        constructors used here except for exotic empty types, which are
        treated as inhabited.
        """
        if k <= 0:
            return True
        ca = ceiling(A)
        if ca is not None:
            k = min(k, ca)
            A = strip(A)
            if k <= 0:
                return True
        cb = ceiling(B)
        if cb is not None:
            B = strip(B)
            if cb < k:
                return _empty(A) or self.subset(A, B, cb, ctx)
        key = (A, B, k, ctx)
        r = self._sub.get(key)
        if r is None:
            self.calls["subset"] += 1
            r = self._subset(A, B, k, ctx)
            self._sub[key] = r
        return r

    def _subset(self, A, B, k, ctx) -> bool:
        if isinstance(A, Bot) or isinstance(B, Top):
            return True
        if canon_type(A) == canon_type(B):
            return True
        if isinstance(A, TVar):
            if isinstance(B, TVar) and B.name == A.name:
                return True
            bound = dict(ctx).get(A.name)
            return bound is not None and self.subset(bound, B, k, ctx)
        if isinstance(A, Top) or isinstance(B, (TVar, Bot)):
            return False
        if isinstance(A, Arrow) and isinstance(B, Arrow):
            return self.subset(B.dom, A.dom, k - 1, ctx) and self.subset(A.cod, B.cod, k - 1, ctx)
        if isinstance(A, (Ref, RefSplit)) and isinstance(B, (Ref, RefSplit)):
            wa, ra = ref_bounds(A)
            wb, rb = ref_bounds(B)
            return self.subset(wb, wa, k - 1, ctx) and self.subset(ra, rb, k - 1, ctx)
        if isinstance(A, OBJECT_CODES) and isinstance(B, OBJECT_CODES):
            if isinstance(B, RecRec):
                return False
            xi = f"%{len(ctx)}"
            inner = ctx + ((xi, A),)
            w = TVar(xi)
            for name in B.names:
                ra = method_ref(A, name, w)
                rb = method_ref(B, name, w)
                if ra is None:
                    return False
                if not (self.subset(rb[0], ra[0], k - 1, inner) and self.subset(ra[1], rb[1], k - 1, inner)):
                    return False
            return True
        if isinstance(A, Mu) and isinstance(B, Mu):
            return self.subset(unroll(A), unroll(B), k - 1, ctx)
        if isinstance(A, All) and isinstance(B, All):
            if not self.subset(B.bound, A.bound, k - 1, ctx):
                return False
            x = f"%{len(ctx)}"
            inner = ctx + ((x, B.bound),)
            return self.subset(subst_type(A.body, A.var, TVar(x)), subst_type(B.body, B.var, TVar(x)), k - 1, inner)
        if isinstance(A, Some) and isinstance(B, Some):
            if not self.subset(A.bound, B.bound, k - 1, ctx):
                return False
            x = f"%{len(ctx)}"
            inner = ctx + ((x, A.bound),)
            return self.subset(subst_type(A.body, A.var, TVar(x)), subst_type(B.body, B.var, TVar(x)), k - 1, inner)
        return False

    # ------------------------------------------------------------------
    # Synthesis of inhabitants
    # ------------------------------------------------------------------

    def synth_value(self, c: Type, depth: int = 0) -> Optional[Term]:
        """A closed, location-free value meant to inhabit ``c`` (not guaranteed)."""
        c = strip(c)
        if isinstance(c, Top):
            return Lam("x", TOP, Var("x"))
        if isinstance(c, Arrow):
            if self.subset(c.dom, c.cod, self._big):
                return Lam("x", c.dom, Var("x"))
            return Lam("x", c.dom, self.synth_term(c.cod, depth + 1))
        if isinstance(c, All):
            return TLam(c.var, c.bound, self.synth_term(subst_type(c.body, c.var, c.bound), depth + 1))
        if isinstance(c, Some):
            v = self.synth_value(subst_type(c.body, c.var, c.bound), depth + 1)
            return None if v is None else Pack(c.var, c.bound, c.bound, v, c.body)
        if isinstance(c, Mu):
            if depth > SYNTH_DEPTH:
                return None
            v = self.synth_value(unroll(c), depth + 1)
            return None if v is None else Fold(c, v)
        return None

    def synth_term(self, c: Type, depth: int = 0) -> Term:
        """A closed term meant to have type ``c``; diverges when nothing better is known."""
        c = strip(c)
        if depth > SYNTH_DEPTH or isinstance(c, (Bot, TVar, Ref, RefSplit)):
            return OMEGA
        if isinstance(c, Top):
            return ObjNew(ObjV(()), ())
        if isinstance(c, OBJECT_CODES):
            annot = c
            ms = []
            names = sorted(c.names)
            for n in names:
                lo, hi = method_ref(c, n, c)
                res = hi.cod if isinstance(hi, Arrow) else TOP
                body = Var("s") if canon_type(strip(res)) == canon_type(c) else self.synth_term(res, depth + 1)
                ms.append((n, "s", annot, body))
            return ObjNew(annot, tuple(ms))
        if isinstance(c, Mu):
            return Fold(c, self.synth_term(unroll(c), depth + 1))
        v = self.synth_value(c, depth)
        return OMEGA if v is None else v

    def inhabitants(self, c: Type) -> tuple:
        """Candidate members of ``c`` as (delta items, value), locations from 0."""
        c = strip(c)
        out = self._inh.get(c)
        if out is not None:
            return out
        res: list = []
        if isinstance(c, OBJECT_CODES):
            names = sorted(c.names)
            variants: Dict[str, List[Type]] = {"canonical": [], "narrow": [], "wide": []}
            for n in names:
                lo, hi = method_ref(c, n, c)
                # stored procedure codes: the upper bound, the tightest lower
                # option, and the loosest upper option
                variants["canonical"].append(hi if not isinstance(hi, Top) else lo)
                if isinstance(lo, Bot):
                    variants["narrow"].append(Arrow(c, BOT))
                else:
                    variants["narrow"].append(lo)
                variants["wide"].append(Arrow(c, TOP) if isinstance(hi, Top) else hi)
            seen = set()
            for codes in variants.values():
                key = tuple(canon_type(x) for x in codes)
                if key in seen:
                    continue
                seen.add(key)
                delta = tuple(enumerate(codes))
                res.append((delta, RuntimeObj(tuple((n, i) for i, n in enumerate(names)))))
        elif isinstance(c, (Ref, RefSplit)):
            w, r = ref_bounds(c)
            for stored in (r, w):
                res.append((((0, stored),), LocVal(0)))
        else:
            v = self.synth_value(c)
            if v is not None:
                res.append(((), v))
            if isinstance(c, Arrow):
                res.append(((), Lam("x", c.dom, OMEGA)))
        out = tuple(res)
        self._inh[c] = out
        return out

    @staticmethod
    def place(psi: Psi, delta, v):
        """Relocate a (delta, value) pair past the locations already typed by ``psi``."""
        if not delta:
            return psi, v
        base = psi.next_loc()
        mp = {l: base + i for i, (l, _) in enumerate(delta)}
        new = {mp[l]: code for l, code in delta}
        if v is None:
            v2 = None
        elif isinstance(v, LocVal):
            v2 = LocVal(mp.get(v.loc, v.loc))
        else:
            v2 = rename_locs(v, mp)
        return psi.extend(new), v2

    def _shuffled(self, seq: Sequence, *salt) -> list:
        out = list(seq)
        random.Random(self.budget.stream(*salt)).shuffle(out)
        return out

    def sample_values(self, j: int, psi: Psi, c: Type, limit: Optional[int] = None) -> List[Tuple[Psi, object]]:
        """Up to ``samples`` values that are members of ``c`` at ``(j, psi ∪ delta)``."""
        limit = limit or self.budget.samples
        cands = list(self.inhabitants(c)) + self._shuffled(self.budget.values, "values", c, j)
        out = []
        tries = 0
        for delta, v in cands:
            if tries >= limit + 4 or len(out) >= limit:
                break
            if isinstance(v, LocVal) != isinstance(strip(c), (Ref, RefSplit)):
                continue
            tries += 1
            p2, v2 = self.place(psi, delta, v)
            if self.mem_value(j, p2, v2, c).kind == HOLDS:
                out.append((p2, v2))
        return out

    def type_candidates(self, bound: Type, k: int, first: Sequence[Type] = ()) -> List[Type]:
        out, seen = [], set()
        pool = list(first) + [bound, BOT] + self._shuffled(self.budget.witnesses, "witness", bound, k)
        for t in pool:
            if not _closed(t):
                continue
            key = canon_type(t)
            if key in seen:
                continue
            seen.add(key)
            if self.subset(t, bound, k):
                out.append(t)
            if len(out) >= self.budget.samples + 1:
                break
        return out

    # ------------------------------------------------------------------
    # Value membership
    # ------------------------------------------------------------------

    def mem_value(self, k: int, psi: Psi, v, c: Type) -> Verdict:
        """``⟨k, psi, v⟩ ∈ c``."""
        if c.ftv:
            raise ValueError(f"code is not closed: {show_code(c)}")
        cl = ceiling(c)
        if cl is not None:
            if k >= cl:
                return ce("index at or above the approximation ceiling", index=k, ceiling=cl)
            c = strip(c)
        key = (k, psi, v, c)
        r = self._mv.get(key)
        if r is None:
            self.calls["mem_value"] += 1
            r = self._mem_value(k, psi, v, c)
            self._mv[key] = r
        return r

    def _mem_value(self, k, psi, v, c) -> Verdict:
        if isinstance(c, Top):
            return H
        if isinstance(c, Bot):
            return ce("the empty type has no members", value=v)
        if isinstance(c, (Ref, RefSplit)):
            if not isinstance(v, LocVal):
                return ce("not a location", value=v, code=c)
            if v.loc not in psi:
                return ce("location not typed by the heap typing", loc=v.loc)
            w, r = ref_bounds(c)
            s = psi[v.loc]
            if not self.subset(w, s, k):
                return ce("stored type does not admit the write type", index=k, stored=s, write=w)
            if not self.subset(s, r, k):
                return ce("stored type exceeds the read type", index=k, stored=s, read=r)
            return H
        if not isinstance(v, Term) or not is_value(v):
            return ce("not a value", value=v)
        if isinstance(c, Arrow):
            if not isinstance(v, Lam):
                return ce("not a procedure", value=v, code=c)
            return self._mem_arrow(k, psi, v, c)
        if isinstance(c, OBJECT_CODES):
            if not isinstance(v, RuntimeObj):
                return ce("not an object", value=v, code=c)
            return self._mem_obj(k, psi, v, c)
        if isinstance(c, Mu):
            if not isinstance(v, Fold):
                return ce("not a fold", value=v, code=c)
            body = unroll(c)
            return all_of(
                self._wrap(self.mem_value(j, psi.approx(j), v.arg, body), "fold payload outside the unrolled type", index=j)
                for j in range(k)
            )
        if isinstance(c, All):
            if not isinstance(v, TLam):
                return ce("not a type abstraction", value=v, code=c)
            return self._mem_all(k, psi, v, c)
        if isinstance(c, Some):
            if not isinstance(v, Pack):
                return ce("not a package", value=v, code=c)
            return self._mem_some(k, psi, v, c)
        raise ValueError(f"unsupported code {show_code(c)}")

    @staticmethod
    def _wrap(r: Verdict, why: str, **at) -> Verdict:
        if r.kind == COUNTEREXAMPLE:
            return ce(why, r, **at)
        return r

    def _mem_arrow(self, k, psi, lam: Lam, c: Arrow) -> Verdict:
        def gen():
            for j in range(1, k):
                pj = psi.approx(j)
                states = [pj]
                if j == k - 1:
                    ext = self._shuffled(self.budget.extensions, "ext", c, j)[0]
                    states.append(self.place(pj, ext, None)[0])
                for st in states:
                    for p2, v in self.sample_values(j, st, c.dom):
                        body = subst(lam.body, {lam.var: v})
                        yield self._wrap(
                            self.mem_term(j, p2, body, c.cod),
                            "procedure body leaves the result type",
                            index=j, psi=p2, argument=v,
                        )

        return all_of(gen())

    def _mem_all(self, k, psi, tl: TLam, c: All) -> Verdict:
        def gen():
            for i in range(1, k):
                for t in self.type_candidates(c.bound, i + 1):
                    body = subst_type_in_term(tl.body, tl.tvar, t)
                    yield self._wrap(
                        self.mem_term(i, psi.approx(i), body, subst_type(c.body, c.var, t)),
                        "instantiation leaves the body type",
                        index=i, instance=t,
                    )

        return all_of(gen())

    def _mem_some(self, k, psi, p: Pack, c: Some) -> Verdict:
        first = [p.witness] if isinstance(p.witness, Type) else []

        def attempt(t):
            payload = subst_type_in_term(p.payload, p.tvar, t)
            body = subst_type(c.body, c.var, t)
            return all_of(
                self._wrap(self.mem_value(j, psi.approx(j), payload, body), "payload outside the body type", index=j, witness=t)
                for j in range(k)
            )

        return any_of((attempt(t) for t in self.type_candidates(c.bound, k, first)), "no witness type fits the package", index=k)

    # objects -------------------------------------------------------------

    def witnesses(self, psi: Psi, o: RuntimeObj, c: Type) -> List[Type]:
        if isinstance(c, RecRec):
            return [c]
        pool = [c]
        if isinstance(c, SelfObj):
            pool.append(rec_record(c))
        for n in sorted(c.names):
            s = psi.map.get(o.loc(n))
            if s is not None and isinstance(strip(s), Arrow):
                pool.append(strip(strip(s).dom))
        pool += [w for w in self.budget.witnesses if isinstance(w, OBJECT_CODES)]
        out, seen = [], set()
        for w in pool:
            if not _closed(w):
                continue
            key = canon_type(w)
            if key not in seen:
                seen.add(key)
                out.append(w)
        return out

    def _mem_obj(self, k, psi, o: RuntimeObj, c) -> Verdict:
        have = {n for n, _ in o.locs}
        need = set(c.names)
        if isinstance(c, RecRec) and have != need:
            return ce("method set differs from the record's", value=o, code=c)
        missing = need - have
        if missing:
            return ce("missing method", value=o, code=c, methods=sorted(missing))
        for n in sorted(need):
            if o.loc(n) not in psi:
                return ce("method location not typed by the heap typing", method=n, loc=o.loc(n))
        if k == 0:
            return H
        return any_of(
            (self.obj_conditions(k, psi, o, c, w) for w in self.witnesses(psi, o, c)),
            "no self type satisfies the object conditions",
            index=k, value=o, code=c,
        )

    def obj_conditions(self, k, psi, o: RuntimeObj, c, w: Type, check_bound: bool = True) -> Verdict:
        """Conditions (Obj-1), (Obj-2) in the form matching ``c``, and (Obj-3), for witness ``w``."""
        if check_bound and not isinstance(c, RecRec) and not self.subset(w, c, k):
            return ce("witness not below the object type", index=k, witness=w)
        for n in sorted(c.names):
            l = o.loc(n)
            lo, hi = method_ref(c, n, w)
            s = psi[l]
            if not self.subset(lo, s, k):
                return ce("method location admits too little", index=k, method=n, stored=s, needed=lo)
            if not self.subset(s, hi, k):
                return ce("method location admits too much", index=k, method=n, stored=s, allowed=hi)

        def gen():
            for j in range(k):
                yield self._wrap(self.mem_value(j, psi.approx(j), o, w), "object not in its self type", index=j, witness=w)
            # a relabelled copy at fresh locations with the same stored types
            j = k - 1
            pj = psi.approx(j)
            base = pj.next_loc()
            mp = {l: base + i for i, (_, l) in enumerate(o.locs) if l in psi}
            moved = RuntimeObj(tuple((n, mp.get(l, l)) for n, l in o.locs))
            p2 = pj.extend({mp[l]: pj[l] for l in mp})
            yield self._wrap(self.mem_value(j, p2, moved, w), "relabelled copy not in the self type", index=j, witness=w)

        return all_of(gen())

    # ------------------------------------------------------------------
    # Heaps and terms
    # ------------------------------------------------------------------

    def heap_typed(self, h: Mapping[int, Term], k: int, psi: Psi) -> Verdict:
        """``h :_k psi``."""
        missing = psi.dom - set(h)
        if missing:
            return ce("heap lacks typed locations", locs=sorted(missing))
        key = (k, psi, tuple(sorted((l, h[l]) for l in psi)))
        r = self._ht.get(key)
        if r is None:
            self.calls["heap_typed"] += 1
            r = all_of(
                self._wrap(self.mem_value(j, psi.approx(j), h[l], psi[l]), "stored procedure outside its heap type", index=j, loc=l)
                for j in range(k)
                for l in psi
            )
            self._ht[key] = r
        return r

    def gen_heaps(self, psi: Psi, k: int, extra: Sequence[Mapping[int, Term]] = ()) -> List[Dict[int, Term]]:
        key = (psi, k)
        hs = self._heaps.get(key)
        if hs is None:
            hs = []
            synth = {}
            for l in psi:
                v = self.synth_value(psi[l])
                if v is None:
                    synth = None
                    break
                synth[l] = v
            cands = [synth] if synth is not None else []
            if all(isinstance(strip(psi[l]), (Arrow, Top)) for l in psi):
                cands.append({l: Lam("x", TOP, OMEGA) for l in psi})
            seen = set()
            for h in cands:
                sig = tuple(sorted(h.items()))
                if sig in seen:
                    continue
                seen.add(sig)
                if self.heap_typed(h, k, psi).kind != COUNTEREXAMPLE:
                    hs.append(h)
            self._heaps[key] = hs
        out = list(hs)
        for h in extra:
            if self.heap_typed(h, k, psi).kind != COUNTEREXAMPLE:
                out.append(dict(h))
        return out

    def mem_term(self, k: int, psi: Psi, a: Term, c: Type, heaps: Sequence[Mapping[int, Term]] = ()) -> Verdict:
        """``a :_{k, psi} c``, over generated well-typed heaps plus ``heaps``."""
        if k <= 0:
            return H
        if self._gauge and k >= self._gauge[-1]:
            raise IndexGaugeError(f"nested term check at index {k} inside index {self._gauge[-1]}")
        key = (k, psi, a, c, tuple(tuple(sorted(h.items())) for h in heaps))
        r = self._mt.get(key)
        if r is not None:
            return r
        self.calls["mem_term"] += 1
        self._gauge.append(k)
        try:
            hs = self.gen_heaps(psi, k, heaps)
            if not hs:
                r = inconclusive("no well-typed heap could be generated")
            else:
                r = all_of(self._term_in_heap(k, psi, a, c, h) for h in hs)
        finally:
            self._gauge.pop()
        self._mt[key] = r
        return r

    def _term_in_heap(self, k, psi, a, c, h) -> Verdict:
        self.calls["runs"] += 1
        tr = run(Config(dict(h), a), k - 1)
        if tr.outcome == "fuel":
            return H
        i = len(tr)
        if tr.outcome == "stuck":
            return ce("term gets stuck", steps=i, reason=tr.reason, term=a, heap=dict(h), trace=tr.render())
        fin = tr.final
        psi2 = self.infer_psi(psi, tr, fin.term, c).approx(k - i)
        hv = self.heap_typed(fin.heap, k - i, psi2)
        if hv.kind == COUNTEREXAMPLE:
            return ce("final heap not well typed", hv, steps=i, term=a, heap=dict(h), psi=psi2)
        mv = self.mem_value(k - i, psi2, fin.term, c)
        if mv.kind == COUNTEREXAMPLE:
            return ce("result outside the type", mv, steps=i, index=k - i, result=fin.term, term=a, heap=dict(h), psi=psi2)
        return all_of((hv, mv))

    @staticmethod
    def stored_code(A: Type, name: str) -> Type:
        """The procedure code a fresh location for method ``name`` of ``A`` gets."""
        lo, hi = method_ref(A, name, A)
        return Arrow(A, TOP) if isinstance(hi, Top) else hi

    def infer_psi(self, psi: Psi, tr, result: Term, goal: Type) -> Psi:
        """The extension of ``psi`` for the locations a run allocated.

        Object literals contribute ``A -> A_d`` from their annotation ``A``;
        clones copy the type of the cloned location; locations still unknown
        are typed from the goal when the result exposes them, else with Top.
        """
        new: Dict[int, Type] = {}
        pending: set = set()
        for s in tr.steps:
            if s.rule == "Red-Obj":
                names = sorted(n for n, _, _, _ in s.redex.methods)
                where = dict(zip(names, s.allocated))
                A = strip(s.redex.annot)
                if _closed(A) and isinstance(A, OBJECT_CODES) and set(A.names) == set(names):
                    for n, l in where.items():
                        new[l] = self.stored_code(A, n)
                else:
                    pending.update(where.values())
            elif s.rule == "Red-Clone":
                src = s.redex.arg
                names = sorted(n for n, _ in src.locs)
                for n, l in zip(names, s.allocated):
                    old = src.loc(n)
                    if old in new:
                        new[l] = new[old]
                    elif old in psi:
                        new[l] = psi[old]
                    else:
                        pending.add(l)
        if pending:
            self._from_goal(result, strip(goal), pending, new)
        for l in pending:
            new.setdefault(l, TOP)
        return psi.extend(new)

    def _from_goal(self, v: Term, g: Type, pending: set, new: Dict[int, Type], depth: int = 0) -> None:
        if depth > 8:
            return
        if isinstance(v, RuntimeObj) and isinstance(g, OBJECT_CODES):
            for n, l in v.locs:
                if l in pending and l not in new and n in g.names:
                    new[l] = self.stored_code(g, n)
        elif isinstance(v, Fold) and isinstance(g, Mu):
            self._from_goal(v.arg, strip(unroll(g)), pending, new, depth + 1)
        elif isinstance(v, Pack) and isinstance(g, Some):
            t = v.witness if isinstance(v.witness, Type) and _closed(v.witness) and self.subset(v.witness, g.bound, self._big) else g.bound
            self._from_goal(subst_type_in_term(v.payload, v.tvar, t), strip(subst_type(g.body, g.var, t)), pending, new, depth + 1)

    # ------------------------------------------------------------------
    # Relations between codes and states
    # ------------------------------------------------------------------

    def approx_eq(self, t1: Type, t2: Type, k: int) -> Verdict:
        if canon_type(approx_code(t1, k)) == canon_type(approx_code(t2, k)):
            return Verdict(HOLDS, {"tier": "alpha"})
        if self.subset(t1, t2, k) and self.subset(t2, t1, k):
            return Verdict(HOLDS, {"tier": "structural"})
        for j in range(k):
            for src, other in ((t1, t2), (t2, t1)):
                for p, v in self.sample_values(j, EMPTY_PSI, src):
                    r = self.mem_value(j, p, v, other)
                    if r.kind == COUNTEREXAMPLE:
                        return ce("approximations differ", r, index=j, value=v, member_of=src, not_member_of=other, psi=p)
        return Verdict(HOLDS, {"tier": "sampled"})

    def state_extends(self, k: int, psi: Psi, j: int, psi2: Psi) -> Verdict:
        if j > k:
            return ce("index increases", k=k, j=j)
        lost = psi.dom - psi2.dom
        if lost:
            return ce("domain shrinks", locs=sorted(lost))
        return all_of(
            self._wrap(self.approx_eq(psi2[l], psi[l], j), "stored type changes", loc=l, index=j) for l in psi
        )

    def sem_subset(self, t1: Type, t2: Type, k_max: Optional[int] = None) -> Verdict:
        k_max = self.budget.k_max if k_max is None else k_max
        n = 0
        for k in range(k_max + 1):
            for p, v in self.sample_values(k, EMPTY_PSI, t1, limit=self.budget.samples + 1):
                n += 1
                r = self.mem_value(k, p, v, t2)
                if r.kind == COUNTEREXAMPLE:
                    return ce("member of the first type outside the second", r, index=k, psi=p, value=v)
        return Verdict(HOLDS, {"samples": n})

    def tsubself(self, w: Type, c: Type, k_max: Optional[int] = None) -> Verdict:
        """Self type exposure ``w ⊑self c`` for an object or self type code ``c``."""
        c = strip(c)
        if not isinstance(c, OBJECT_CODES):
            raise ValueError("self type exposure needs an object or self type")
        sub = self.sem_subset(w, c, k_max)
        if sub.kind == COUNTEREXAMPLE:
            return ce("not a subset", sub)
        k_max = self.budget.k_max if k_max is None else k_max
        parts = [sub]
        for k in range(1, k_max + 1):
            for p, v in self.sample_values(k, EMPTY_PSI, w, limit=self.budget.samples + 1):
                if isinstance(v, RuntimeObj) and set(c.names) <= {n for n, _ in v.locs}:
                    r = self.obj_conditions(k, p, v, c, w, check_bound=False)
                    if r.kind == COUNTEREXAMPLE:
                        return ce("member violates the self conditions", r, index=k, psi=p, value=v)
                    parts.append(r)
        return all_of(parts)


_ENGINES: Dict[Budget, Engine] = {}


def engine_for(budget: Optional[Budget] = None) -> Engine:
    budget = budget or Budget()
    e = _ENGINES.get(budget)
    if e is None:
        if len(_ENGINES) > 8:
            _ENGINES.clear()
        e = _ENGINES[budget] = Engine(budget)
    return e


def describe_value(v) -> str:
    return str(v) if isinstance(v, LocVal) else print_term(v)


def witness_runs(detail) -> List[dict]:
    """The recorded evaluator runs in a counterexample chain, outermost first."""
    out = []
    while isinstance(detail, dict):
        at = detail.get("at", {})
        if "term" in at and "heap" in at and "steps" in at:
            out.append(at)
        detail = detail.get("cause")
    return out


def replay_witness(detail) -> bool:
    """Re-run every recorded evaluation in a counterexample and compare outcomes."""
    runs = witness_runs(detail)
    if not runs:
        return False
    for at in runs:
        tr = run(Config(dict(at["heap"]), at["term"]), at["steps"] + 1)
        if len(tr) != at["steps"]:
            return False
        if "result" in at and (tr.outcome != "value" or tr.final.term != at["result"]):
            return False
        if "reason" in at and (tr.outcome != "stuck" or tr.reason != at["reason"]):
            return False
    return True
