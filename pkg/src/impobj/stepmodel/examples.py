"""The step-index false positive: a procedure that looks well typed for two steps.

``v = λy. {m = l}.m`` stored next to ``Ψ = {l ↦ P → P}`` with
``P = [p:inv Top]``.  Claimed type ``Top → Q`` with ``Q = [q:inv Top]``.
The body needs two steps (invoke, then beta) before it returns ``{m = l}``,
which lacks ``q``; the argument is taken at index ``j ≥ 3`` and the body
must finish within ``j - 1`` steps, so the first failing index is 4.
"""
from __future__ import annotations

from typing import Dict, List

from ..eval import Config, run
from ..syntax.parser import parse_term, parse_type
from .engine import Engine
from .verdict import Psi, Verdict

P_TYPE = parse_type("[p:inv Top]")
Q_TYPE = parse_type("[q:inv Top]")
PSI = Psi({0: parse_type("[p:inv Top] -> [p:inv Top]")})
VALUE = parse_term("λ(y:Top) {m = l0}.m")
CLAIM = parse_type("Top -> [q:inv Top]")


def false_positive(k: int, engine: Engine = None) -> Verdict:
    """``mem_value(k, Ψ, v, Top → Q)``."""
    return (engine or Engine()).mem_value(k, PSI, VALUE, CLAIM)


def first_failing_index(k_max: int = 6, engine: Engine = None) -> int:
    E = engine or Engine()
    for k in range(k_max + 1):
        if false_positive(k, E).is_counterexample:
            return k
    return -1


def confirm_with_evaluator(heap: Dict[int, object] = None) -> List[str]:
    """Run the body on a sample argument; returns the rules taken and checks the result lacks ``q``."""
    h = heap if heap is not None else {0: parse_term("λ(s:[p:inv Top]) s")}
    tr = run(Config(dict(h), parse_term("(λ(y:Top) {m = l0}.m) {}")), 10)
    return [s.rule for s in tr.steps] + [tr.outcome, str(tr.final.term)]
