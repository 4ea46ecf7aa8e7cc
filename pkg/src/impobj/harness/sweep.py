"""Exhaustive sweeps over the enumerated subtyping universe."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from ..syntax.ast import Type
from ..syntax.parser import parse_term
from ..syntax.pretty import print_type
from ..typecheck import EMPTY, SPLIT, VARIANCE, typable
from ..typecheck.encode import encode_to_split
from ..syntax.binding import desugar_self
from ..typecheck.subtype import Fuel, Rules, subtype_fuel
from .oracle import DeclarativeOracle, default_oracle
from .universe import closed_universe

SWEEP_FUEL = 100_000

# Typable in split mode only: [m:con Bot] and [m:cov Top] both encode to [m:(Bot, Top)].
SPLIT_ONLY_WITNESS = "λ(y:[m:con Bot]) (λ(x:[m:cov Top]) x) y"


@dataclass
class SweepReport:
    pairs: int = 0
    agree: int = 0
    yes: int = 0
    unknown: int = 0
    mismatches: List[Tuple[str, str, str]] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.agree == self.pairs and self.unknown == 0

    def to_json(self) -> dict:
        return {
            "pairs": self.pairs,
            "agree": self.agree,
            "yes": self.yes,
            "unknown": self.unknown,
            "mismatches": self.mismatches[:50],
            "seconds": round(self.seconds, 3),
            "ok": self.ok,
        }


def oracle_sweep(types: Optional[Sequence[Type]] = None, oracle: Optional[DeclarativeOracle] = None, depth: int = 8) -> SweepReport:
    """Compare the algorithm with the declarative oracle on every ordered pair."""
    t0 = time.perf_counter()
    types = list(types if types is not None else closed_universe())
    oracle = oracle or default_oracle()
    M = oracle.matrix(depth)
    idx = oracle.levels[0].index
    from ..syntax.binding import canon_type

    rep = SweepReport()
    prepared = [desugar_self(T) for T in types]
    cols = [idx[canon_type(T)] for T in types]
    rules = Rules(VARIANCE)
    for A, pa, a in zip(types, prepared, cols):
        row = M[a]
        for B, pb, b in zip(types, prepared, cols):
            r = subtype_fuel(EMPTY, pa, pb, Fuel(SWEEP_FUEL), rules)
            rep.pairs += 1
            if r.verdict == "unknown":
                rep.unknown += 1
                rep.mismatches.append((print_type(A), print_type(B), "unknown"))
                continue
            want = bool(row[b])
            rep.yes += want
            if r.yes == want:
                rep.agree += 1
            else:
                rep.mismatches.append((print_type(A), print_type(B), f"algorithm {r.verdict}, oracle {'yes' if want else 'no'}"))
    rep.seconds = time.perf_counter() - t0
    return rep


def encoding_sweep(types: Optional[Sequence[Type]] = None) -> SweepReport:
    """Every variance-mode Yes pair must stay Yes after encoding into split form.

    ``pairs`` counts the variance-mode Yes pairs and ``agree`` those preserved.
    """
    t0 = time.perf_counter()
    types = list(types if types is not None else closed_universe())
    rep = SweepReport()
    var = [desugar_self(T) for T in types]
    spl = [encode_to_split(T, strict=False) for T in types]
    rv, rs = Rules(VARIANCE), Rules(SPLIT)
    for i, A in enumerate(types):
        for j, B in enumerate(types):
            if not subtype_fuel(EMPTY, var[i], var[j], Fuel(SWEEP_FUEL), rv).yes:
                continue
            rep.pairs += 1
            rep.yes += 1
            r = subtype_fuel(EMPTY, spl[i], spl[j], Fuel(SWEEP_FUEL), rs)
            if r.verdict == "unknown":
                rep.unknown += 1
            if r.yes:
                rep.agree += 1
            else:
                rep.mismatches.append((print_type(A), print_type(B), f"split {r.verdict}"))
    rep.seconds = time.perf_counter() - t0
    return rep


def split_only_witness() -> Tuple[bool, bool]:
    """(typable in split mode, typable in variance mode) for the witness program."""
    t = parse_term(SPLIT_ONLY_WITNESS)
    return typable(t, SPLIT) is not None, typable(t, VARIANCE) is not None
