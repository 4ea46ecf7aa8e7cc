"""Lemma falsification: sampled instances of the semantic typing lemmas.

A lemma is a list of instances.  Each instance has premises and a
conclusion, all of them checks that produce a ``Verdict``.  An instance is
*vacuous* when a premise has a counterexample, a *counterexample* when all
premises hold and the conclusion fails, and *inconclusive* when a premise or
the conclusion could not be decided within budget.

Mutations weaken one side condition (or flip one variance) so the suite can
demonstrate that it finds counterexamples when the statement is false.
"""
from __future__ import annotations


import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from ..syntax.ast import TOP, All, App, Arrow, Fold, Mu, ObjSplit, ObjV, Some, Term, Type
from ..syntax.binding import subst, subst_type, subst_type_in_term
from ..syntax.parser import parse_term, parse_type
from ..syntax.pretty import print_term
from .codes import Ref, RefSplit, approx_code, interp, rec_record, self_body, show_code
from .engine import Engine, all_of, engine_for
from .verdict import COUNTEREXAMPLE, EMPTY_PSI, HOLDS, INCONCLUSIVE, Budget, H, Psi, Verdict, ce, inconclusive, jsonable

VACUOUS = "Vacuous"


class UnknownLemma(KeyError):
    pass


class UnknownMutation(ValueError):
    pass


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    desc: str
    run: Callable[[Engine], Verdict]


def judge(E: Engine, sigma: Mapping[str, Type], a: Term, tau: Type, k_max: Optional[int] = None) -> Verdict:
    """``Σ ⊨ a : τ``: sampled closing substitutions at every index up to ``k_max``."""
    k_max = E.budget.k_max if k_max is None else k_max
    names = sorted(sigma)
    n = 0
    for k in range(1, k_max + 1):
        for psi, sub in _closing_substs(E, k, names, sigma):
            n += 1
            t = subst(a, sub) if sub else a
            r = E.mem_term(k, psi, t, tau)
            if r.kind == COUNTEREXAMPLE:
                return ce("judgement fails", r, index=k, psi=psi, substitution=sub, term=t, type=tau)
            if r.kind == INCONCLUSIVE:
                return r
    return Verdict(HOLDS, {"instances": n})


def _closing_substs(E: Engine, k: int, names: Sequence[str], sigma) -> Iterator[Tuple[Psi, dict]]:
    if not names:
        yield EMPTY_PSI, {}
        return
    # one sample list per variable, combined index-wise so the count stays linear
    for i in range(E.budget.samples):
        psi, sub = EMPTY_PSI, {}
        for x in names:
            got = E.sample_values(k, psi, sigma[x])
            if not got:
                return
            psi, v = got[i % len(got)]
            sub[x] = v
        yield psi, sub


def J(sigma: Mapping[str, Type], a: Term, tau: Type) -> Check:
    env = ", ".join(f"{x}:{show_code(t)}" for x, t in sorted(sigma.items()))
    return Check(f"{env} ⊨ {print_term(a)} : {show_code(tau)}", lambda E: judge(E, sigma, a, tau))


def SUB(t1: Type, t2: Type) -> Check:
    return Check(f"{show_code(t1)} ⊆ {show_code(t2)}", lambda E: E.sem_subset(t1, t2))


def SIDE(desc: str, ok: bool) -> Check:
    return Check(desc, lambda E: H if ok else ce(f"side condition fails: {desc}"))


def FORALL(desc: str, cands: Callable[[Engine], List], body: Callable[[object], Check]) -> Check:
    """``∀ t ∈ cands. body(t)`` over a finite candidate list."""

    def run(E):
        return all_of(_labelled(body(t), E) for t in cands(E))

    return Check(desc, run)


def _labelled(c: Check, E: Engine) -> Verdict:
    r = c.run(E)
    if r.kind == COUNTEREXAMPLE:
        return ce(f"fails: {c.desc}", r)
    return r


def below(bound: Type) -> Callable[[Engine], List[Type]]:
    """Candidate types ``τ ⊆ bound``."""
    return lambda E: E.type_candidates(bound, E._big)


def self_candidates(alpha: Type) -> Callable[[Engine], List[Type]]:
    """Candidate types ``ξ ⊑self alpha``: the recursive record and catalog codes passing the check."""

    def go(E):
        out = []
        for t in [rec_record(alpha)] + list(E.type_candidates(alpha, E._big)):
            if E.tsubself(t, alpha, min(E.budget.k_max, 3)).kind == HOLDS:
                out.append(t)
        return out

    return go


# ---------------------------------------------------------------------------
# Instances and lemmas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    params: Dict[str, str]
    premises: Tuple[Check, ...]
    conclusion: Check


@dataclass(frozen=True)
class Lemma:
    name: str
    group: str
    statement: str
    build: Callable[[Optional[str]], List[Instance]]
    mutations: Tuple[str, ...] = ()

    def instances(self, mutation: Optional[str] = None) -> List[Instance]:
        if mutation is not None and mutation not in self.mutations:
            raise UnknownMutation(f"lemma {self.name} has no mutation {mutation!r}; known: {', '.join(self.mutations) or 'none'}")
        return self.build(mutation)


REGISTRY: Dict[str, Lemma] = {}


def lemma(name: str, group: str, statement: str, mutations: Tuple[str, ...] = ()):
    def deco(fn):
        REGISTRY[name] = Lemma(name, group, statement, fn, mutations)
        return fn

    return deco


def T(s: str) -> Term:
    return parse_term(s)


def Y(s: str) -> Type:
    return parse_type(s)


def P(**kw) -> Dict[str, str]:
    return {k: (show_code(v) if isinstance(v, Type) else print_term(v) if isinstance(v, Term) else str(v)) for k, v in kw.items()}


def fam(var: str, body: str) -> Tuple[str, Type]:
    return var, Y(body)


def app(F: Tuple[str, Type], t: Type) -> Type:
    return subst_type(F[1], F[0], t)


# ---------------------------------------------------------------------------
# Procedure types
# ---------------------------------------------------------------------------


@lemma("SemLam", "procedure", "Σ, x:α ⊨ b : β  ⟹  Σ ⊨ λx.b : α → β")
def _sem_lam(mut):
    out = []
    for a, b, body in (
        ("Top", "Top", "x"),
        ("[m:inv Top]", "Top", "x.m"),
        ("[m:inv Top]", "[m:inv Top]", "x"),
        ("Top", "[p:inv Top]", "obj [p:inv Top] {p = ς(s:[p:inv Top]) s}"),
        ("[m:cov Top]", "Top", "x.m"),
        ("Top", "Top", "x.m"),
    ):
        A, B, bt = Y(a), Y(b), T(body)
        out.append(Instance(P(alpha=A, beta=B, b=bt), (J({"x": A}, bt, B),), J({}, T(f"λ(x:{a}) {body}"), Arrow(A, B))))
    return out


@lemma("SemApp", "procedure", "Σ ⊨ a : α → β  ∧  Σ ⊨ b : α  ⟹  Σ ⊨ a b : β")
def _sem_app(mut):
    out = []
    for sig, f, x, a, b in (
        ({}, "λ(x:Top) x", "obj [] {}", "Top", "Top"),
        ({}, "λ(x:[m:inv Top]) x.m", "obj [m:inv Top] {m = ς(s:[m:inv Top]) obj [] {}}", "[m:inv Top]", "Top"),
        ({}, "λ(x:Top) obj [p:inv Top] {p = ς(s:[p:inv Top]) s}", "λ(y:Top) y", "Top", "[p:inv Top]"),
        ({"f": "Top -> Top", "y": "Top"}, "f", "y", "Top", "Top"),
        ({"f": "[m:cov Top] -> [m:cov Top]", "y": "[m:inv Top]"}, "f", "y", "[m:cov Top]", "[m:cov Top]"),
    ):
        S = {k: Y(v) for k, v in sig.items()}
        A, B = Y(a), Y(b)
        ft, xt = T(f), T(x)
        out.append(
            Instance(
                P(sigma=", ".join(f"{k}:{v}" for k, v in sig.items()), a=ft, b=xt, alpha=A, beta=B),
                (J(S, ft, Arrow(A, B)), J(S, xt, A)),
                J(S, App(ft, xt), B),
            )
        )
    return out


@lemma("SemSubProc", "procedure", "α′ ⊆ α  ∧  β ⊆ β′  ⟹  α → β ⊆ α′ → β′")
def _sem_sub_proc(mut):
    out = []
    for a1, a, b, b1 in (
        ("[m:inv Top]", "Top", "Bot", "Top"),
        ("[m:inv Top, n:inv Top]", "[m:inv Top]", "[m:inv Top]", "Top"),
        ("[m:inv Top]", "[m:cov Top]", "[p:inv Top]", "Top"),
        ("[m:cov Top]", "[m:inv Top]", "Top", "Top"),
    ):
        A1, A, B, B1 = Y(a1), Y(a), Y(b), Y(b1)
        out.append(Instance(P(alpha1=A1, alpha=A, beta=B, beta1=B1), (SUB(A1, A), SUB(B, B1)), SUB(Arrow(A, B), Arrow(A1, B1))))
    return out


# ---------------------------------------------------------------------------
# Reference types
# ---------------------------------------------------------------------------

_PAYLOADS = (
    ("[m:inv Top]", "Top"),
    ("[m:inv Top, n:inv Top]", "[m:inv Top]"),
    ("Bot", "[m:inv Top]"),
    ("Top -> [m:inv Top]", "Top -> Top"),
    ("[m:cov Top]", "[m:inv Top]"),
)


@lemma("SemSubCovRef", "reference", "τ ⊆ τ′  ⟹  ref⁺ τ ⊆ ref⁺ τ′", ("invert-covariance",))
def _sem_sub_cov_ref(mut):
    out = []
    for s, t in _PAYLOADS:
        A, B = Y(s), Y(t)
        concl = SUB(Ref("cov", B), Ref("cov", A)) if mut == "invert-covariance" else SUB(Ref("cov", A), Ref("cov", B))
        out.append(Instance(P(tau=A, tau1=B), (SUB(A, B),), concl))
    return out


@lemma("SemSubConRef", "reference", "τ′ ⊆ τ  ⟹  ref⁻ τ ⊆ ref⁻ τ′")
def _sem_sub_con_ref(mut):
    return [
        Instance(P(tau=Y(t), tau1=Y(s)), (SUB(Y(s), Y(t)),), SUB(Ref("con", Y(t)), Ref("con", Y(s))))
        for s, t in _PAYLOADS
    ]


@lemma("SemSubVarRef", "reference", "ref∘ τ ⊆ ref⁺ τ  ∧  ref∘ τ ⊆ ref⁻ τ")
def _sem_sub_var_ref(mut):
    out = []
    for s in ("Top", "Bot", "[m:inv Top]", "[m:cov Top]", "Top -> Top", "Mu(X) [m:cov X]"):
        A = Y(s)
        out.append(Instance(P(tau=A, to="ref+"), (), SUB(Ref("inv", A), Ref("cov", A))))
        out.append(Instance(P(tau=A, to="ref-"), (), SUB(Ref("inv", A), Ref("con", A))))
    return out


@lemma("SemSubRef-Gen", "reference", "τw′ ⊆ τw  ∧  τr ⊆ τr′  ⟹  ref(τw, τr) ⊆ ref(τw′, τr′)")
def _sem_sub_ref_gen(mut):
    out = []
    for w, r, w1, r1 in (
        ("[m:inv Top]", "Top", "[m:inv Top, n:inv Top]", "Top"),
        ("Bot", "[m:inv Top]", "Bot", "[m:cov Top]"),
        ("[m:inv Top]", "[m:inv Top]", "Bot", "Top"),
        ("Top", "Top", "[m:inv Top]", "[m:inv Top]"),
    ):
        W, R, W1, R1 = Y(w), Y(r), Y(w1), Y(r1)
        out.append(Instance(P(write=W, read=R, write1=W1, read1=R1), (SUB(W1, W), SUB(R, R1)), SUB(RefSplit(W, R), RefSplit(W1, R1))))
    return out


# ---------------------------------------------------------------------------
# Object types
# ---------------------------------------------------------------------------


def _obj_literal(alpha: str, bodies: Mapping[str, str]) -> Term:
    ms = ", ".join(f"{n} = ς(s:{alpha}) {b}" for n, b in sorted(bodies.items()))
    return T(f"obj {alpha} {{{ms}}}")


def _result(A: Type, name: str) -> Tuple[str, Type]:
    """(variance-or-kind, result type) of method ``name`` in an object code."""
    if isinstance(A, ObjV):
        return A.method(name)
    if isinstance(A, ObjSplit):
        w, r = A.method(name)
        return "split", r
    return self_body(A, name, A)


@lemma("SemObj", "object", "∀d. Σ, x_d:α ⊨ b_d : τ_d  ⟹  Σ ⊨ obj{m_d = ς(x_d) b_d} : α")
def _sem_obj(mut):
    out = []
    for alpha, bodies in (
        ("[m:inv Top]", {"m": "s"}),
        ("[m:cov Top]", {"m": "s.m"}),
        ("[m:inv Top, n:cov [m:inv Top]]", {"m": "obj [] {}", "n": "s"}),
        ("[m:con Top]", {"m": "obj [] {}"}),
        ("[m:inv Top]", {"m": "s.m"}),
        ("[m:inv [p:inv Top]]", {"m": "obj [] {}"}),
    ):
        A = Y(alpha)
        prem = tuple(J({"s": A}, T(b), _result(A, n)[1]) for n, b in sorted(bodies.items()))
        out.append(Instance(P(alpha=A, bodies=bodies), prem, J({}, _obj_literal(alpha, bodies), A)))
    return out


_INV_CASES = (
    # (alpha, Σ, receiver term, method)
    ("[m:inv Top]", {}, "obj [m:inv Top] {m = ς(s:[m:inv Top]) s}", "m"),
    ("[m:cov [m:cov Top]]", {}, "obj [m:cov [m:cov Top]] {m = ς(s:[m:cov [m:cov Top]]) s}", "m"),
    ("[m:cov [p:inv Top]]", {"o": "[m:cov [p:inv Top]]"}, "o", "m"),
    ("[m:inv Top, n:cov Top]", {"o": "[m:inv Top, n:cov Top]"}, "o", "n"),
    ("[m:con [q:inv Top]]", {}, "obj [m:con [q:inv Top]] {m = ς(s:[m:con [q:inv Top]]) s}", "m"),
    ("[m:con [q:inv Top]]", {"o": "[m:con [q:inv Top]]"}, "o", "m"),
)


@lemma("SemInv", "object", "Σ ⊨ a : α  ∧  ν_e ∈ {cov, inv}  ⟹  Σ ⊨ a.m_e : τ_e", ("drop-inv-variance",))
def _sem_inv(mut):
    out = []
    allowed = ("cov", "inv", "con") if mut == "drop-inv-variance" else ("cov", "inv")
    for alpha, sig, recv, m in _INV_CASES:
        A = Y(alpha)
        S = {k: Y(v) for k, v in sig.items()}
        a = T(recv)
        v, t = A.method(m)
        out.append(
            Instance(
                P(alpha=A, a=a, method=m),
                (J(S, a, A), SIDE(f"variance {v} of {m} allows invocation", v in allowed)),
                J(S, T(f"({recv}).{m}"), t),
            )
        )
    return out


_UPD_CASES = (
    # (alpha, Σ, receiver, method, body, declared body type or None)
    ("[m:inv Top]", {"o": "[m:inv Top]"}, "o", "m", "s", None),
    ("[m:inv [m:inv Top]]", {"o": "[m:inv [m:inv Top]]"}, "o", "m", "s", None),
    ("[m:con Top]", {"o": "[m:con Top]"}, "o", "m", "obj [] {}", None),
    ("[m:inv Top, n:cov Top]", {}, "obj [m:inv Top, n:cov Top] {m = ς(s:[m:inv Top, n:cov Top]) s, n = ς(s:[m:inv Top, n:cov Top]) s}", "m", "s.n", None),
    ("[m:cov Top]", {"o": "[m:cov Top]"}, "o", "m", "s", None),
    ("[m:inv [p:inv Top]]", {"o": "[m:inv [p:inv Top]]"}, "o", "m", "s", "Top"),
)


@lemma(
    "SemUpd",
    "object",
    "Σ ⊨ a : α  ∧  ν_e ∈ {con, inv}  ∧  Σ, x:α ⊨ b : τ_e  ⟹  Σ ⊨ a.m_e ⇐ ς(x) b : α",
    ("drop-upd-variance", "covariant-upd-body"),
)
def _sem_upd(mut):
    out = []
    allowed = ("con", "inv", "cov") if mut == "drop-upd-variance" else ("con", "inv")
    for alpha, sig, recv, m, body, loose in _UPD_CASES:
        A = Y(alpha)
        S = {k: Y(v) for k, v in sig.items()}
        a = T(recv)
        v, t = A.method(m)
        if loose is not None and mut != "covariant-upd-body":
            continue
        need = TOP if mut == "covariant-upd-body" else t
        prem = (
            J(S, a, A),
            SIDE(f"variance {v} of {m} allows update", v in allowed),
            J({**S, "s": A}, T(body), need),
        )
        out.append(Instance(P(alpha=A, a=a, method=m, body=T(body)), prem, J(S, T(f"({recv}).{m} := ς(s:{alpha}) {body}"), A)))
    return out


@lemma("SemClone", "object", "Σ ⊨ a : α  ⟹  Σ ⊨ clone(a) : α")
def _sem_clone(mut):
    out = []
    for alpha, sig, recv in (
        ("[m:inv Top]", {}, "obj [m:inv Top] {m = ς(s:[m:inv Top]) s}"),
        ("[m:cov Top]", {"o": "[m:cov Top]"}, "o"),
        ("[m:inv Top, n:con Top]", {"o": "[m:inv Top, n:con Top]"}, "o"),
        ("[m:inv [m:inv Top]]", {"o": "[m:inv [m:inv Top]]"}, "o"),
    ):
        A = Y(alpha)
        S = {k: Y(v) for k, v in sig.items()}
        out.append(Instance(P(alpha=A, a=T(recv)), (J(S, T(recv), A),), J(S, T(f"clone({recv})"), A)))
    return out


_SUBOBJ_CASES = (
    ("[m:inv Top, n:inv Top]", "[m:inv Top]"),
    ("[m:cov [m:inv Top]]", "[m:cov Top]"),
    ("[m:con Top]", "[m:con [m:inv Top]]"),
    ("[m:inv Top, n:cov [p:inv Top]]", "[n:cov Top]"),
    ("[m:inv Top]", "[m:inv Top, n:inv Top]"),
    ("[m:cov Top]", "[m:cov [m:inv Top]]"),
)


@lemma(
    "SemSubObj",
    "object",
    "E ⊆ D  ∧  (ν_e ∈ {cov, inv} ⟹ α_e ⊆ β_e)  ∧  (ν_e ∈ {con, inv} ⟹ β_e ⊆ α_e)  ⟹  [m_d:ν_d α_d] ⊆ [m_e:ν_e β_e]",
    ("width-reversed-subobj",),
)
def _sem_sub_obj(mut):
    out = []
    for a, b in _SUBOBJ_CASES:
        A, B = Y(a), Y(b)
        if mut == "width-reversed-subobj":
            width = SIDE("D ⊆ E", A.names <= B.names)
        else:
            width = SIDE("E ⊆ D", B.names <= A.names)
        prem = [width]
        for n in sorted(A.names & B.names):
            va, ta = A.method(n)
            vb, tb = B.method(n)
            prem.append(SIDE(f"{n} has the same variance on both sides", va == vb))
            if va in ("cov", "inv"):
                prem.append(SUB(ta, tb))
            if va in ("con", "inv"):
                prem.append(SUB(tb, ta))
        out.append(Instance(P(alpha=A, beta=B), tuple(prem), SUB(A, B)))
    return out


@lemma("SemSubObjVar", "object", "∀d. ν_d = inv ∨ ν_d = ν′_d  ⟹  [m_d:ν_d α_d] ⊆ [m_d:ν′_d α_d]")
def _sem_sub_obj_var(mut):
    out = []
    for a, b in (
        ("[m:inv Top]", "[m:cov Top]"),
        ("[m:inv [m:inv Top]]", "[m:con [m:inv Top]]"),
        ("[m:cov Top, n:inv Top]", "[m:cov Top, n:cov Top]"),
        ("[m:cov Top]", "[m:inv Top]"),
    ):
        A, B = Y(a), Y(b)
        ok = all(v == "inv" or v == B.method(n)[0] for n, v, _ in A.methods)
        out.append(Instance(P(alpha=A, beta=B), (SIDE("every variance is inv or unchanged", ok),), SUB(A, B)))
    return out


# ---------------------------------------------------------------------------
# Generalized (split) object types
# ---------------------------------------------------------------------------


@lemma("SemObj-Gen", "generalized", "∀d. Σ, x_d:α′ ⊨ b_d : τ_d  ⟹  Σ ⊨ obj{m_d = ς(x_d) b_d} : α′  with α′ = [m_d:(τ_d, τ_d)]")
def _sem_obj_gen(mut):
    out = []
    for alpha, bodies in (
        ("[m:(Top, Top)]", {"m": "s"}),
        ("[m:([m:(Top, Top)], [m:(Top, Top)])]", {"m": "s"}),
        ("[m:(Top, Top), n:([], [])]", {"m": "s.n", "n": "obj [] {}"}),
        ("[m:([q:(Top, Top)], [q:(Top, Top)])]", {"m": "s"}),
    ):
        A = Y(alpha)
        prem = tuple(J({"s": A}, T(b), A.method(n)[1]) for n, b in sorted(bodies.items()))
        out.append(Instance(P(alpha=A, bodies=bodies), prem, J({}, _obj_literal(alpha, bodies), A)))
    return out


@lemma("SemInv-Gen", "generalized", "Σ ⊨ a : α  ⟹  Σ ⊨ a.m_e : τ^r_e", ("con-read-at-payload",))
def _sem_inv_gen(mut):
    out = []
    for alpha, sig, recv, m in (
        ("[m:(Top, Top)]", {}, "obj [m:(Top, Top)] {m = ς(s:[m:(Top, Top)]) s}", "m"),
        ("[m:([q:(Top, Top)], Top)]", {"o": "[m:([q:(Top, Top)], Top)]"}, "o", "m"),
        ("[m:(Bot, [m:(Bot, Top)])]", {"o": "[m:(Bot, [m:(Bot, Top)])]"}, "o", "m"),
    ):
        A = Y(alpha)
        S = {k: Y(v) for k, v in sig.items()}
        w, r = A.method(m)
        res = w if mut == "con-read-at-payload" else r
        out.append(Instance(P(alpha=A, a=T(recv), method=m), (J(S, T(recv), A),), J(S, T(f"({recv}).{m}"), res)))
    return out


@lemma("SemUpd-Gen", "generalized", "Σ ⊨ a : α  ∧  Σ, x:α ⊨ b : τ^w_e  ⟹  Σ ⊨ a.m_e ⇐ ς(x) b : α")
def _sem_upd_gen(mut):
    out = []
    for alpha, sig, recv, m, body in (
        ("[m:(Top, Top)]", {"o": "[m:(Top, Top)]"}, "o", "m", "s"),
        ("[m:([m:(Top, Top)], Top)]", {"o": "[m:([m:(Top, Top)], Top)]"}, "o", "m", "s"),
        ("[m:(Bot, Top)]", {"o": "[m:(Bot, Top)]"}, "o", "m", "s"),
    ):
        A = Y(alpha)
        S = {k: Y(v) for k, v in sig.items()}
        w, _ = A.method(m)
        out.append(
            Instance(
                P(alpha=A, a=T(recv), method=m, body=T(body)),
                (J(S, T(recv), A), J({**S, "s": A}, T(body), w)),
                J(S, T(f"({recv}).{m} := ς(s:{alpha}) {body}"), A),
            )
        )
    return out


@lemma("SemClone-Gen", "generalized", "Σ ⊨ a : α  ⟹  Σ ⊨ clone(a) : α")
def _sem_clone_gen(mut):
    out = []
    for alpha in ("[m:(Top, Top)]", "[m:(Bot, Top)]", "[m:([m:(Top, Top)], Top), n:(Top, Top)]"):
        A = Y(alpha)
        S = {"o": A}
        out.append(Instance(P(alpha=A), (J(S, T("o"), A),), J(S, T("clone(o)"), A)))
    return out


@lemma("SemSubObj-Gen", "generalized", "E ⊆ D  ∧  β^w_e ⊆ α^w_e  ∧  α^r_e ⊆ β^r_e  ⟹  [m_d:(α^w_d, α^r_d)] ⊆ [m_e:(β^w_e, β^r_e)]")
def _sem_sub_obj_gen(mut):
    out = []
    for a, b in (
        ("[m:(Top, Top), n:(Top, Top)]", "[m:(Top, Top)]"),
        ("[m:(Top, [m:(Top, Top)])]", "[m:(Bot, Top)]"),
        ("[m:([m:(Top, Top)], Top)]", "[m:([m:(Top, Top), n:(Top, Top)], Top)]"),
        ("[m:(Bot, Top)]", "[m:(Top, Top)]"),
    ):
        A, B = Y(a), Y(b)
        prem = [SIDE("E ⊆ D", B.names <= A.names)]
        for n in sorted(A.names & B.names):
            wa, ra = A.method(n)
            wb, rb = B.method(n)
            prem += [SUB(wb, wa), SUB(ra, rb)]
        out.append(Instance(P(alpha=A, beta=B), tuple(prem), SUB(A, B)))
    return out


# ---------------------------------------------------------------------------
# Bounded quantified types
# ---------------------------------------------------------------------------


@lemma("SemTAbs", "quantifier", "(∀τ ⊆ α. Σ ⊨ a : F(τ))  ⟹  Σ ⊨ ΛX.a : ∀(X<:α)F")
def _sem_tabs(mut):
    out = []
    for bound, body_ty, body in (
        ("Top", "X -> X", "λ(x:X) x"),
        ("[m:inv Top]", "X -> Top", "λ(x:X) x.m"),
        ("Top", "[]", "obj [] {}"),
        ("[m:cov Top]", "X -> X", "λ(x:X) x"),
        ("Top", "X -> Top", "λ(x:X) x.m"),
    ):
        A = Y(bound)
        F = fam("X", body_ty)
        a = T(body)
        prem = FORALL(f"∀τ ⊆ {bound}. ⊨ a[τ] : F(τ)", below(A), lambda t, a=a, F=F: J({}, subst_type_in_term(a, "X", t), app(F, t)))
        out.append(Instance(P(alpha=A, F=F[1], a=a), (prem,), J({}, T(f"Fun(X<:{bound}) {body}"), All("X", A, F[1]))))
    return out


@lemma("SemTApp", "quantifier", "Σ ⊨ a : ∀(X<:α)F  ∧  τ ⊆ α  ⟹  Σ ⊨ a[τ] : F(τ)")
def _sem_tapp(mut):
    out = []
    for bound, body_ty, fn, arg in (
        ("Top", "X -> X", "Fun(X<:Top) λ(x:X) x", "[m:inv Top]"),
        ("[m:inv Top]", "X -> Top", "Fun(X<:[m:inv Top]) λ(x:X) x.m", "[m:inv Top, n:inv Top]"),
        ("[m:cov Top]", "X -> X", "Fun(X<:[m:cov Top]) λ(x:X) x", "[m:inv Top]"),
        ("[m:inv Top]", "X -> Top", "Fun(X<:[m:inv Top]) λ(x:X) x.m", "Top"),
    ):
        A, C = Y(bound), Y(arg)
        F = fam("X", body_ty)
        U = All("X", A, F[1])
        out.append(Instance(P(alpha=A, F=F[1], a=T(fn), tau=C), (J({}, T(fn), U), SUB(C, A)), J({}, T(f"({fn})[{arg}]"), app(F, C))))
        out.append(
            Instance(P(alpha=A, F=F[1], a="u", tau=C), (J({"u": U}, T("u"), U), SUB(C, A)), J({"u": U}, T(f"u[{arg}]"), app(F, C)))
        )
    return out


@lemma("SemPack", "quantifier", "τ ⊆ α  ∧  Σ ⊨ a : F(τ)  ⟹  Σ ⊨ pack a : ∃(X<:α)F")
def _sem_pack(mut):
    out = []
    for bound, body_ty, wit, payload in (
        ("Top", "X -> X", "Top", "λ(x:Top) x"),
        ("[m:inv Top]", "X -> Top", "[m:inv Top, n:inv Top]", "λ(x:[m:inv Top, n:inv Top]) x.n"),
        ("Top", "X", "[p:inv Top]", "obj [p:inv Top] {p = ς(s:[p:inv Top]) s}"),
        ("[m:inv Top]", "X", "Top", "obj [] {}"),
    ):
        A, C = Y(bound), Y(wit)
        F = fam("X", body_ty)
        a = T(payload)
        out.append(
            Instance(
                P(alpha=A, F=F[1], tau=C, a=a),
                (SUB(C, A), J({}, a, app(F, C))),
                J({}, T(f"pack<X<:{bound}={wit}, {payload} : {body_ty}>"), Some("X", A, F[1])),
            )
        )
    return out


@lemma("SemOpen", "quantifier", "Σ ⊨ a : ∃(X<:α)F  ∧  (∀τ ⊆ α. Σ, x:F(τ) ⊨ b : β)  ⟹  Σ ⊨ open a as x in b : β")
def _sem_open(mut):
    out = []
    for bound, body_ty, pkg, b, beta in (
        ("Top", "X -> X", "pack<X<:Top=Top, λ(x:Top) x : X -> X>", "x", "Top"),
        ("[m:inv Top]", "X", "pack<X<:[m:inv Top]=[m:inv Top], obj [m:inv Top] {m = ς(s:[m:inv Top]) s} : X>", "x.m", "Top"),
        ("[m:inv Top]", "X", "p", "x", "[m:inv Top]"),
        ("Top", "X", "p", "x.m", "Top"),
    ):
        A, B = Y(bound), Y(beta)
        F = fam("X", body_ty)
        S = {"p": Some("X", A, F[1])} if pkg == "p" else {}
        body = T(b)
        prem2 = FORALL(
            f"∀τ ⊆ {bound}. x:F(τ) ⊨ {b} : {beta}",
            below(A),
            lambda t, F=F, body=body, S=S, B=B: J({**S, "x": app(F, t)}, body, B),
        )
        term = T(f"open ({pkg}) as <X<:{bound}, x:{body_ty}> in {b} : {beta}")
        out.append(Instance(P(alpha=A, F=F[1], a=T(pkg), b=body, beta=B), (J(S, T(pkg), Some("X", A, F[1])), prem2), J(S, term, B)))
    return out


def _family_sub(F, G, bound: Type) -> Check:
    return FORALL(f"∀τ ⊆ {show_code(bound)}. F(τ) ⊆ G(τ)", below(bound), lambda t: SUB(app(F, t), app(G, t)))


@lemma("SemSubUniv", "quantifier", "β ⊆ α  ∧  (∀τ ⊆ β. F(τ) ⊆ G(τ))  ⟹  ∀(X<:α)F ⊆ ∀(X<:β)G")
def _sem_sub_univ(mut):
    out = []
    for a, b, f, g in (
        ("Top", "[m:inv Top]", "X -> X", "X -> Top"),
        ("[m:cov Top]", "[m:inv Top]", "X -> X", "X -> X"),
        ("Top", "Top", "X -> [m:inv Top]", "X -> Top"),
        ("[m:inv Top]", "Top", "X -> X", "X -> X"),
    ):
        A, B = Y(a), Y(b)
        F, G = fam("X", f), fam("X", g)
        out.append(Instance(P(alpha=A, beta=B, F=F[1], G=G[1]), (SUB(B, A), _family_sub(F, G, B)), SUB(All("X", A, F[1]), All("X", B, G[1]))))
    return out


@lemma("SemSubExist", "quantifier", "α ⊆ β  ∧  (∀τ ⊆ α. F(τ) ⊆ G(τ))  ⟹  ∃(X<:α)F ⊆ ∃(X<:β)G")
def _sem_sub_exist(mut):
    out = []
    for a, b, f, g in (
        ("[m:inv Top]", "Top", "X", "X"),
        ("[m:inv Top]", "[m:cov Top]", "X -> X", "X -> Top"),
        ("Top", "Top", "[m:inv Top]", "Top"),
        ("Top", "[m:inv Top]", "X", "X"),
    ):
        A, B = Y(a), Y(b)
        F, G = fam("X", f), fam("X", g)
        out.append(Instance(P(alpha=A, beta=B, F=F[1], G=G[1]), (SUB(A, B), _family_sub(F, G, A)), SUB(Some("X", A, F[1]), Some("X", B, G[1]))))
    return out


# ---------------------------------------------------------------------------
# Recursive types
# ---------------------------------------------------------------------------

_MUS = ("Mu(X) [m:cov X]", "Mu(X) Top -> X", "Mu(X) [m:inv Top, n:cov X]")


@lemma("SemUnfold", "recursive", "Σ ⊨ a : μF  ⟹  Σ ⊨ unfold a : F(μF)")
def _sem_unfold(mut):
    out = []
    for mu in _MUS:
        M = Y(mu)
        S = {"r": M}
        out.append(Instance(P(mu=M), (J(S, T("r"), M),), J(S, T(f"unfold[{mu}] r"), subst_type(M.body, M.var, M))))
    M = Y("Mu(X) Top -> X")
    closed = T("fold[Mu(X) Top -> X] λ(x:Top) (obj [w:inv Bot] {w = ς(s:[w:inv Bot]) s.w}).w")
    out.append(Instance(P(mu=M, a=closed), (J({}, closed, M),), J({}, T(f"unfold[Mu(X) Top -> X] ({print_term(closed)})"), subst_type(M.body, M.var, M))))
    return out


@lemma("SemFold", "recursive", "Σ ⊨ a : F(μF)  ⟹  Σ ⊨ fold a : μF")
def _sem_fold(mut):
    out = []
    for mu in _MUS:
        M = Y(mu)
        U = subst_type(M.body, M.var, M)
        S = {"u": U}
        out.append(Instance(P(mu=M), (J(S, T("u"), U),), J(S, T(f"fold[{mu}] u"), M)))
    return out


@lemma("SemSubRec", "recursive", "(∀α ⊆ β. F(α) ⊆ G(β))  ⟹  μF ⊆ μG")
def _sem_sub_rec(mut):
    out = []
    for f, g in (
        ("[m:cov X]", "[m:cov X]"),
        ("[m:inv Top, n:cov X]", "[n:cov X]"),
        ("Top -> X", "Top -> X"),
        ("X -> Top", "X -> Top"),
    ):
        F, G = fam("X", f), fam("X", g)

        def pairs(E):
            ws = [w for w in E.budget.witnesses][:8]
            return [(a, b) for a in ws for b in ws if E.subset(a, b, E._big)][: 2 * E.budget.samples]

        prem = FORALL("∀α ⊆ β. F(α) ⊆ G(β)", pairs, lambda ab, F=F, G=G: SUB(app(F, ab[0]), app(G, ab[1])))
        out.append(Instance(P(F=F[1], G=G[1]), (prem,), SUB(Mu("X", F[1]), Mu("X", G[1]))))
    return out


# ---------------------------------------------------------------------------
# Self types (direct codes)
# ---------------------------------------------------------------------------

_SELF = (
    ("Obj(X)[m:inv X]", {"m": "s"}),
    ("Obj(X)[m:cov X, n:inv Top]", {"m": "s", "n": "s.m"}),
    ("Obj(X)[m:con X]", {"m": "s"}),
)


@lemma("SemObj-Self", "self", "∀d. Σ, x_d:α ⊨ b_d : F_d(α)  ⟹  Σ ⊨ obj{m_d = ς(x_d) b_d} : α")
def _sem_obj_self(mut):
    out = []
    for alpha, bodies in _SELF + (("Obj(X)[m:inv [p:inv Top]]", {"m": "s"}),):
        A = Y(alpha)
        prem = tuple(J({"s": A}, T(b), self_body(A, n, A)[1]) for n, b in sorted(bodies.items()))
        out.append(Instance(P(alpha=A, bodies=bodies), prem, J({}, _obj_literal(alpha, bodies), A)))
    return out


@lemma("SemInv-Self", "self", "Σ ⊨ a : α  ∧  ν_e ∈ {cov, inv}  ⟹  Σ ⊨ a.m_e : F_e(α)")
def _sem_inv_self(mut):
    out = []
    for alpha, bodies in _SELF:
        A = Y(alpha)
        for n in sorted(bodies):
            v, t = self_body(A, n, A)
            lit = print_term(_obj_literal(alpha, bodies))
            for S, recv in (({}, lit), ({"o": A}, "o")):
                out.append(
                    Instance(
                        P(alpha=A, a=T(recv), method=n),
                        (J(S, T(recv), A), SIDE(f"variance {v} of {n} allows invocation", v in ("cov", "inv"))),
                        J(S, T(f"({recv}).{n}"), t),
                    )
                )
    return out


@lemma("SemUpd-Self", "self", "Σ ⊨ a : α  ∧  ν_e ∈ {con, inv}  ∧  (∀ξ ⊆ α. Σ, x:ξ ⊨ b : F_e(ξ))  ⟹  Σ ⊨ a.m_e ⇐ ς(x) b : α")
def _sem_upd_self(mut):
    out = []
    for alpha, m, body in (("Obj(X)[m:inv X]", "m", "s"), ("Obj(X)[m:con X]", "m", "s"), ("Obj(X)[m:cov X, n:inv Top]", "n", "s.m")):
        A = Y(alpha)
        v, _ = self_body(A, m, A)
        S = {"o": A}
        b = T(body)
        prem = (
            J(S, T("o"), A),
            SIDE(f"variance {v} of {m} allows update", v in ("con", "inv")),
            FORALL(f"∀ξ ⊆ {alpha}. x:ξ ⊨ {body} : F(ξ)", below(A), lambda xi, A=A, m=m, b=b: J({"s": xi}, b, self_body(A, m, xi)[1])),
        )
        out.append(Instance(P(alpha=A, method=m, body=b), prem, J(S, T(f"o.{m} := ς(s:{alpha}) {body}"), A)))
    return out


@lemma("SemClone-Self", "self", "Σ ⊨ a : α  ⟹  Σ ⊨ clone(a) : α")
def _sem_clone_self(mut):
    out = []
    for alpha, _ in _SELF:
        A = Y(alpha)
        out.append(Instance(P(alpha=A), (J({"o": A}, T("o"), A),), J({"o": A}, T("clone(o)"), A)))
    return out


@lemma(
    "SemSubObj-Self",
    "self",
    "∀e. (ν_e ∈ {cov, inv} ⟹ ∀ξ ⊆ α. F_e(ξ) ⊆ G_e(ξ))  ∧  (ν_e ∈ {con, inv} ⟹ ∀ξ ⊆ α. G_e(ξ) ⊆ F_e(ξ))  ⟹  α ⊆ β",
)
def _sem_sub_obj_self(mut):
    out = []
    for a, b in (
        ("Obj(X)[m:cov X, n:inv Top]", "Obj(X)[m:cov X]"),
        ("Obj(X)[m:cov [m:inv Top]]", "Obj(X)[m:cov Top]"),
        ("Obj(X)[m:inv X]", "Obj(X)[m:inv X, n:inv Top]"),
    ):
        A, B = Y(a), Y(b)
        prem = [SIDE("E ⊆ D", B.names <= A.names)]
        for n in sorted(A.names & B.names):
            va, _ = self_body(A, n, A)
            vb, _ = self_body(B, n, B)
            prem.append(SIDE(f"{n} has the same variance on both sides", va == vb))
            if va in ("cov", "inv"):
                prem.append(FORALL(f"∀ξ ⊆ α. F_{n}(ξ) ⊆ G_{n}(ξ)", below(A), lambda xi, A=A, B=B, n=n: SUB(self_body(A, n, xi)[1], self_body(B, n, xi)[1])))
            if va in ("con", "inv"):
                prem.append(FORALL(f"∀ξ ⊆ α. G_{n}(ξ) ⊆ F_{n}(ξ)", below(A), lambda xi, A=A, B=B, n=n: SUB(self_body(B, n, xi)[1], self_body(A, n, xi)[1])))
        out.append(Instance(P(alpha=A, beta=B), tuple(prem), SUB(A, B)))
    return out


@lemma("SemSubObjVar-Self", "self", "∀d. ν_d = inv ∨ ν_d = ν′_d  ⟹  Obj(X)[m_d:ν_d F_d] ⊆ Obj(X)[m_d:ν′_d F_d]")
def _sem_sub_obj_var_self(mut):
    out = []
    for a, b in (("Obj(X)[m:inv X]", "Obj(X)[m:cov X]"), ("Obj(X)[m:inv X]", "Obj(X)[m:con X]"), ("Obj(X)[m:cov X]", "Obj(X)[m:inv X]")):
        A, B = Y(a), Y(b)
        ok = all(v == "inv" or v == self_body(B, n, B)[0] for n, v, _ in A.methods)
        out.append(Instance(P(alpha=A, beta=B), (SIDE("every variance is inv or unchanged", ok),), SUB(A, B)))
    return out


# ---------------------------------------------------------------------------
# Structural assumptions
# ---------------------------------------------------------------------------


@lemma("SemInv-Str", "structural", "α′ ⊑self α  ∧  Σ ⊨ a : α′  ∧  ν_e ∈ {cov, inv}  ⟹  Σ ⊨ a.m_e : F_e(α′)")
def _sem_inv_str(mut):
    out = []
    for alpha, m in (("Obj(X)[m:cov X]", "m"), ("Obj(X)[m:inv X, n:inv Top]", "n")):
        A = Y(alpha)
        R = rec_record(A)
        v, _ = self_body(A, m, R)
        S = {"o": R}
        out.append(
            Instance(
                P(alpha=A, alpha1=R, method=m),
                (Check(f"{show_code(R)} ⊑self {alpha}", lambda E, R=R, A=A: E.tsubself(R, A, 3)), J(S, T("o"), R), SIDE(f"variance {v} allows invocation", v in ("cov", "inv"))),
                J(S, T(f"o.{m}"), self_body(A, m, R)[1]),
            )
        )
    return out


@lemma("SemUpd-Str", "structural", "α′ ⊑self α  ∧  Σ ⊨ a : α′  ∧  ν_e ∈ {con, inv}  ∧  Σ, x:α′ ⊨ b : F_e(α′)  ⟹  Σ ⊨ a.m_e ⇐ ς(x) b : α′")
def _sem_upd_str(mut):
    out = []
    for alpha, m, body in (("Obj(X)[m:inv X]", "m", "s"), ("Obj(X)[m:inv X, n:con Top]", "n", "s.m")):
        A = Y(alpha)
        R = rec_record(A)
        v, t = self_body(A, m, R)
        S = {"o": R}
        out.append(
            Instance(
                P(alpha=A, alpha1=R, method=m, body=T(body)),
                (
                    Check(f"{show_code(R)} ⊑self {alpha}", lambda E, R=R, A=A: E.tsubself(R, A, 3)),
                    J(S, T("o"), R),
                    SIDE(f"variance {v} allows update", v in ("con", "inv")),
                    J({"s": R}, T(body), t),
                ),
                J(S, T(f"o.{m} := ς(s:{alpha}) {body}"), R),
            )
        )
    return out


@lemma("SemClone-Str", "structural", "α′ ⊑self α  ∧  Σ ⊨ a : α′  ⟹  Σ ⊨ clone(a) : α′")
def _sem_clone_str(mut):
    out = []
    for alpha in ("Obj(X)[m:inv X]", "Obj(X)[m:cov X, n:inv Top]"):
        A = Y(alpha)
        R = rec_record(A)
        S = {"o": R}
        out.append(
            Instance(
                P(alpha=A, alpha1=R),
                (Check(f"{show_code(R)} ⊑self {alpha}", lambda E, R=R, A=A: E.tsubself(R, A, 3)), J(S, T("o"), R)),
                J(S, T("clone(o)"), R),
            )
        )
    return out


@lemma("SemLet-Str", "structural", "Σ ⊨ a : α  ∧  (∀ξ ⊑self α. Σ, x:ξ ⊨ b : β)  ⟹  Σ ⊨ let x = a in b : β")
def _sem_let_str(mut):
    out = []
    for alpha, body, beta in (("Obj(X)[m:inv X]", "x.m", "Obj(X)[m:inv X]"), ("Obj(X)[m:cov X, n:inv Top]", "clone(x)", "Obj(X)[m:cov X]")):
        A, B = Y(alpha), Y(beta)
        S = {"o": A}
        b = T(body)
        prem = (J(S, T("o"), A), FORALL(f"∀ξ ⊑self {alpha}. x:ξ ⊨ {body} : {beta}", self_candidates(A), lambda xi, b=b, B=B: J({"x": xi}, b, B)))
        out.append(Instance(P(alpha=A, b=b, beta=B), prem, J(S, T(f"let x = o in {body}"), B)))
    return out


@lemma("SemObj-Str", "structural", "(∀d. ∀ξ ⊑self α. Σ, x_d:ξ ⊨ b_d : F_d(ξ))  ⟹  Σ ⊨ obj{m_d = ς(x_d) b_d} : α")
def _sem_obj_str(mut):
    out = []
    for alpha, bodies in _SELF[:2]:
        A = Y(alpha)
        prem = tuple(
            FORALL(f"∀ξ ⊑self α. s:ξ ⊨ {b} : F_{n}(ξ)", self_candidates(A), lambda xi, A=A, n=n, b=T(b): J({"s": xi}, b, self_body(A, n, xi)[1]))
            for n, b in sorted(bodies.items())
        )
        out.append(Instance(P(alpha=A, bodies=bodies), prem, J({}, _obj_literal(alpha, bodies), A)))
    return out


# ---------------------------------------------------------------------------
# Properties of semantic types and states
# ---------------------------------------------------------------------------

_CODES = (
    "Top",
    "Top -> Top",
    "[m:inv Top]",
    "[m:cov [m:inv Top]]",
    "[m:con Top]",
    "Mu(X) [m:cov X]",
    "All(X<:Top) X -> X",
    "Some(X<:[m:inv Top]) X",
    "[m:(Bot, Top)]",
    "Obj(X)[m:inv X]",
)


def _member_samples(E: Engine, code: Type, ks=None):
    ks = range(E.budget.k_max + 1) if ks is None else ks
    for k in ks:
        for p, v in E.sample_values(k, EMPTY_PSI, code):
            yield k, p, v


@lemma("ClosedUnderExtension", "semantic-type", "⟨k,Ψ,v⟩ ∈ τ  ∧  (k,Ψ) ⊑ (j,Ψ′)  ⟹  ⟨j,Ψ′,v⟩ ∈ τ")
def _closure(mut):
    out = []
    for c in _CODES:
        C = Y(c)

        def run(E, C=C):
            parts = []
            for k, p, v in _member_samples(E, C):
                for j in sorted({k, max(k - 1, 0), k // 2}):
                    for ext in ((),) + tuple(E.budget.extensions[: E.budget.samples]):
                        p2 = E.place(p.approx(j), ext, None)[0]
                        if E.state_extends(k, p, j, p2).kind != HOLDS:
                            continue
                        r = E.mem_value(j, p2, v, C)
                        if r.kind == COUNTEREXAMPLE:
                            return ce("membership lost under extension", r, k=k, j=j, psi=p, psi1=p2, value=v)
                        parts.append(r)
            return all_of(parts)

        out.append(Instance(P(tau=C), (), Check(f"{c} is closed under state extension", run)))
    return out


@lemma("NonExpansive", "semantic-type", "⌊⟦A⟧η⌋_k = ⌊⟦A⟧⌊η⌋_k⌋_k")
def _non_expansive(mut):
    out = []
    for a in ("X -> X", "[m:inv X]", "[m:cov X, n:con X]", "Mu(Y) [m:cov Y, n:inv X]", "All(Z<:X) Z -> X", "Some(Z<:X) Z"):
        A = Y(a)
        for x in ("Top", "[m:inv Top]", "Top -> Top"):
            eta = {"X": Y(x)}
            for k in (1, 3):

                def run(E, A=A, eta=eta, k=k):
                    lo = {n: approx_code(c, k) for n, c in eta.items()}
                    return E.approx_eq(interp(A, eta), interp(A, lo), k)

                out.append(Instance(P(A=A, eta=f"X ↦ {x}", k=k), (), Check(f"non-expansive at {k}", run)))
    for a, b in (("Top", "Top"), ("[m:inv Top]", "Top -> Top")):
        for k in (2, 4):
            A, B = Y(a), Y(b)
            out.append(
                Instance(
                    P(A=A, B=B, k=k),
                    (),
                    Check(f"A→B vs ⌊A⌋_{k}→⌊B⌋_{k}", lambda E, A=A, B=B, k=k: E.approx_eq(Arrow(A, B), Arrow(approx_code(A, k), approx_code(B, k)), k)),
                )
            )
    return out


@lemma("MuFixedPoint", "semantic-type", "⟨k,Ψ,fold v⟩ ∈ μF  ⟺  ∀j<k. ⟨j,⌊Ψ⌋_j,v⟩ ∈ F(μF)")
def _mu_fixed(mut):
    out = []
    for mu in _MUS + ("Mu(X) X -> X",):
        M = Y(mu)
        U = subst_type(M.body, M.var, M)

        def run(E, M=M, U=U):
            parts = []
            for k in range(E.budget.k_max + 1):
                for p, v in E.sample_values(k, EMPTY_PSI, U) + E.sample_values(max(k - 1, 0), EMPTY_PSI, U):
                    lhs = E.mem_value(k, p, Fold(M, v), M)
                    rhs = all_of(E.mem_value(j, p.approx(j), v, U) for j in range(k))
                    if (lhs.kind == COUNTEREXAMPLE) != (rhs.kind == COUNTEREXAMPLE):
                        return ce("fold membership disagrees with the unrolled type", k=k, psi=p, value=v, fold=lhs, unrolled=rhs)
                    parts.append(lhs)
            return Verdict(HOLDS, {"samples": len(parts)})

        out.append(Instance(P(mu=M), (), Check("fixed point", run)))
    return out


@lemma("ApproxMonotone", "semantic-type", "j < k  ⟹  (⟨j,⌊Ψ⌋_j,v⟩ ∈ ⌊τ⌋_k  ⟺  ⟨j,⌊Ψ⌋_j,v⟩ ∈ τ)")
def _approx_mono(mut):
    out = []
    for c in _CODES:
        C = Y(c)

        def run(E, C=C):
            n = 0
            for k in range(1, E.budget.k_max + 1):
                for j, p, v in _member_samples(E, C, range(k)):
                    pj = p.approx(j)
                    a = E.mem_value(j, pj, v, approx_code(C, k))
                    b = E.mem_value(j, pj, v, C)
                    n += 1
                    if a.kind != b.kind and COUNTEREXAMPLE in (a.kind, b.kind):
                        return ce("approximation changes membership below its ceiling", j=j, k=k, value=v, approx=a, plain=b)
            return Verdict(HOLDS, {"samples": n})

        out.append(Instance(P(tau=C), (), Check("monotone approximation", run)))
    return out


def _psis(E: Engine) -> List[Psi]:
    out = [EMPTY_PSI]
    for delta in E.budget.extensions:
        out.append(E.place(EMPTY_PSI, delta, None)[0])
    for delta, _ in E.budget.values:
        if delta:
            out.append(E.place(EMPTY_PSI, delta, None)[0])
    return out[: 2 + 2 * E.budget.samples]


@lemma("StateExtensionPreorder", "semantic-type", "⊑ is reflexive and transitive")
def _preorder(mut):
    def refl(E):
        return all_of(E.state_extends(k, p, k, p) for p in _psis(E) for k in range(E.budget.k_max + 1))

    def trans(E):
        parts = []
        for p in _psis(E):
            for k in range(E.budget.k_max + 1):
                for ext in E.budget.extensions[:2]:
                    j = max(k - 1, 0)
                    p1 = E.place(p.approx(j), ext, None)[0]
                    i = j // 2
                    p2 = E.place(p1.approx(i), ext, None)[0]
                    a, b = E.state_extends(k, p, j, p1), E.state_extends(j, p1, i, p2)
                    if a.holds and b.holds:
                        parts.append(E.state_extends(k, p, i, p2))
        return all_of(parts)

    return [Instance(P(law="reflexive"), (), Check("reflexivity", refl)), Instance(P(law="transitive"), (), Check("transitivity", trans))]


@lemma("InformationForgetting", "semantic-type", "j ≤ k  ⟹  (k,Ψ) ⊑ (j,⌊Ψ⌋_j)")
def _forgetting(mut):
    def run(E):
        return all_of(E.state_extends(k, p, j, p.approx(j)) for p in _psis(E) for k in range(E.budget.k_max + 1) for j in range(k + 1))

    return [Instance(P(), (), Check("information-forgetting extension", run))]


@lemma("ValueTermRelation", "semantic-type", "⟨k,Ψ,v⟩ ∈ τ ⟹ v :_{k,Ψ} τ;  v :_{k,Ψ} τ ∧ k > 0 ∧ ∃h. h :_k Ψ ⟹ ⟨k,Ψ,v⟩ ∈ τ")
def _value_term(mut):
    out = []
    for c in _CODES:
        C = Y(c)

        def forward(E, C=C):
            parts = []
            for k, p, v in _member_samples(E, C):
                if isinstance(v, Term):
                    parts.append(E._wrap(E.mem_term(k, p, v, C), "member value fails as a term", k=k, psi=p, value=v))
            return all_of(parts)

        def backward(E, C=C):
            parts = []
            for delta, v in E.budget.values:
                for k in range(1, E.budget.k_max + 1):
                    p, v2 = E.place(EMPTY_PSI, delta, v)
                    if not E.gen_heaps(p, k):
                        continue
                    if E.mem_term(k, p, v2, C).kind != HOLDS:
                        continue
                    parts.append(E._wrap(E.mem_value(k, p, v2, C), "term-typed value is not a member", k=k, psi=p, value=v2))
            return all_of(parts)

        out.append(Instance(P(tau=C, direction="member ⟹ term"), (), Check("value to term", forward)))
        out.append(Instance(P(tau=C, direction="term ⟹ member"), (), Check("term to value", backward)))
    return out


@lemma("RecRecSelfExposure", "semantic-type", "the recursive record of a self type is a self type exposure of it")
def _recrec(mut):
    out = []
    for alpha in ("Obj(X)[m:inv X]", "Obj(X)[m:cov X, n:inv Top]", "Obj(X)[m:con X]"):
        A = Y(alpha)
        R = rec_record(A)
        out.append(Instance(P(alpha=A), (), Check(f"{show_code(R)} ⊑self {alpha}", lambda E, R=R, A=A: E.tsubself(R, A))))
    return out


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

STOCK_MUTATIONS = (
    ("SemInv", "drop-inv-variance"),
    ("SemUpd", "drop-upd-variance"),
    ("SemUpd", "covariant-upd-body"),
    ("SemSubObj", "width-reversed-subobj"),
    ("SemInv-Gen", "con-read-at-payload"),
)


def default_mutation(name: str) -> str:
    lem = get_lemma(name)
    if not lem.mutations:
        raise UnknownMutation(f"lemma {name} has no mutations")
    return lem.mutations[0]


def get_lemma(name: str) -> Lemma:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownLemma(f"unknown lemma {name!r}") from None


def lemma_names(group: Optional[str] = None) -> List[str]:
    return [n for n, l in REGISTRY.items() if group is None or l.group == group]


def lemma_for_mutation(mutation: str) -> str:
    for n, l in REGISTRY.items():
        if mutation in l.mutations:
            return n
    raise UnknownMutation(f"unknown mutation {mutation!r}")


@dataclass
class InstanceResult:
    lemma: str
    index: int
    mutation: Optional[str]
    params: Dict[str, str]
    outcome: str
    premises: List[Tuple[str, Verdict]]
    conclusion: Optional[Tuple[str, Verdict]]
    seed: int
    budget: dict
    seconds: float

    def to_json(self) -> dict:
        out = {
            "lemma": self.lemma,
            "instance": self.index,
            "mutation": self.mutation,
            "params": self.params,
            "outcome": self.outcome,
            "premises": [{"check": d, **v.to_json()} for d, v in self.premises],
            "conclusion": None if self.conclusion is None else {"check": self.conclusion[0], **self.conclusion[1].to_json()},
            "seed": self.seed,
            "budget": self.budget,
            "seconds": round(self.seconds, 3),
        }
        return jsonable(out)


@dataclass
class LemmaReport:
    lemma: str
    mutation: Optional[str]
    results: List[InstanceResult] = field(default_factory=list)

    def counts(self) -> Dict[str, int]:
        out = {HOLDS: 0, COUNTEREXAMPLE: 0, INCONCLUSIVE: 0, VACUOUS: 0}
        for r in self.results:
            out[r.outcome] += 1
        return out

    @property
    def counterexamples(self) -> List[InstanceResult]:
        return [r for r in self.results if r.outcome == COUNTEREXAMPLE]

    @property
    def verdict(self) -> Verdict:
        c = self.counts()
        if c[COUNTEREXAMPLE]:
            return Verdict(COUNTEREXAMPLE, {"why": f"{c[COUNTEREXAMPLE]} instance(s) falsify {self.lemma}", "instances": [r.index for r in self.counterexamples]})
        if c[HOLDS] == 0 and c[INCONCLUSIVE]:
            return inconclusive(f"{c[INCONCLUSIVE]} instance(s) undecided within budget")
        return Verdict(HOLDS, c)


def run_instance(E: Engine, name: str, index: int, inst: Instance, mutation: Optional[str]) -> InstanceResult:
    t0 = time.perf_counter()
    prem: List[Tuple[str, Verdict]] = []
    outcome = None
    undecided = False
    for c in inst.premises:
        v = c.run(E)
        prem.append((c.desc, v))
        if v.kind == COUNTEREXAMPLE:
            outcome = VACUOUS
            break
        undecided |= v.kind == INCONCLUSIVE
    concl = None
    if outcome is None:
        v = inst.conclusion.run(E)
        concl = (inst.conclusion.desc, v)
        if v.kind == COUNTEREXAMPLE:
            outcome = INCONCLUSIVE if undecided else COUNTEREXAMPLE
        elif v.kind == INCONCLUSIVE or undecided:
            outcome = INCONCLUSIVE
        else:
            outcome = HOLDS
    return InstanceResult(
        name, index, mutation, inst.params, outcome, prem, concl, E.budget.seed, E.budget.describe(), time.perf_counter() - t0
    )


def check_lemma(name: str, budget: Optional[Budget] = None, mutation: Optional[str] = None, engine: Optional[Engine] = None) -> LemmaReport:
    """Evaluate every instance of ``name`` (optionally mutated)."""
    lem = get_lemma(name)
    E = engine or engine_for(budget)
    rep = LemmaReport(name, mutation)
    for i, inst in enumerate(lem.instances(mutation)):
        rep.results.append(run_instance(E, name, i, inst, mutation))
    return rep


def replay(record: Mapping) -> InstanceResult:
    """Re-run one instance from its JSON record with a fresh engine."""
    b = record["budget"]
    budget = Budget(k_max=b["k_max"], samples=b["samples"], seed=b["seed"])
    E = Engine(budget)
    name, idx, mut = record["lemma"], record["instance"], record.get("mutation")
    inst = get_lemma(name).instances(mut)[idx]
    return run_instance(E, name, idx, inst, mut)


def suite(budget: Optional[Budget] = None, names: Optional[Sequence[str]] = None) -> Dict[str, LemmaReport]:
    E = engine_for(budget)
    return {n: check_lemma(n, engine=E) for n in (names or list(REGISTRY))}


def mutation_suite(budget: Optional[Budget] = None) -> Dict[Tuple[str, str], LemmaReport]:
    E = engine_for(budget)
    return {(n, m): check_lemma(n, mutation=m, engine=E) for n, m in STOCK_MUTATIONS}
