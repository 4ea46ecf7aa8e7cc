"""Safety fuzzing: generate well-typed programs and run them."""
from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional

from ..eval import run_term
from ..syntax.pretty import print_term, print_type
from .generate import GenConfig, GenerationFailed, gen_well_typed, program_seed

OUTCOMES = ("Value", "FuelExhausted", "Stuck")
_LABEL = {"value": "Value", "fuel": "FuelExhausted", "stuck": "Stuck"}


@dataclass
class FuzzFailure:
    index: int
    seed: int
    program: str
    type: str
    outcome: str
    reason: Optional[str]
    steps: int


@dataclass
class FuzzReport:
    generated: int = 0
    typechecked: int = 0
    gave_up: int = 0
    outcomes: Dict[str, int] = field(default_factory=lambda: {k: 0 for k in OUTCOMES})
    rules: Dict[str, int] = field(default_factory=dict)
    failures: List[FuzzFailure] = field(default_factory=list)
    fuel_exhausted_seeds: List[int] = field(default_factory=list)
    gave_up_seeds: List[int] = field(default_factory=list)
    seconds: float = 0.0
    config: Dict = field(default_factory=dict)

    @property
    def stuck(self) -> int:
        return self.outcomes["Stuck"]

    @property
    def ok(self) -> bool:
        return self.stuck == 0

    def merge(self, other: "FuzzReport") -> "FuzzReport":
        out = FuzzReport(
            self.generated + other.generated,
            self.typechecked + other.typechecked,
            self.gave_up + other.gave_up,
            {k: self.outcomes[k] + other.outcomes[k] for k in OUTCOMES},
            dict(Counter(self.rules) + Counter(other.rules)),
            self.failures + other.failures,
            self.fuel_exhausted_seeds + other.fuel_exhausted_seeds,
            self.gave_up_seeds + other.gave_up_seeds,
            self.seconds + other.seconds,
            self.config or other.config,
        )
        return out

    def to_json(self) -> dict:
        d = asdict(self)
        d["stuck"] = self.stuck
        d["ok"] = self.ok
        return d

    def summary(self) -> str:
        o = self.outcomes
        return (
            f"generated {self.generated}, typechecked {self.typechecked}, gave up {self.gave_up}; "
            f"Value {o['Value']}, FuelExhausted {o['FuelExhausted']}, Stuck {o['Stuck']}"
        )


def fuzz_one(cfg: GenConfig, index: int, report: FuzzReport) -> None:
    seed = program_seed(cfg.seed, index)
    try:
        term, A = gen_well_typed(replace(cfg, seed=seed))
    except GenerationFailed:
        report.gave_up += 1
        report.gave_up_seeds.append(seed)
        return
    report.generated += 1
    report.typechecked += 1  # gen_well_typed re-checks every program it emits
    tr = run_term(term, cfg.fuel)
    label = _LABEL[tr.outcome]
    report.outcomes[label] += 1
    for s in tr.steps:
        report.rules[s.rule] = report.rules.get(s.rule, 0) + 1
    if label == "FuelExhausted":
        report.fuel_exhausted_seeds.append(seed)
    elif label == "Stuck":
        report.failures.append(FuzzFailure(index, seed, print_term(term), print_type(A), label, tr.reason, len(tr)))


def _chunk(args):
    cfg, lo, hi = args
    rep = FuzzReport()
    for i in range(lo, hi):
        fuzz_one(cfg, i, rep)
    return rep


def fuzz_safety(cfg: GenConfig, n: int, jobs: int = 1) -> FuzzReport:
    """Generate ``n`` programs, run each for ``cfg.fuel`` steps and tally outcomes.

    Program ``i`` is generated from ``program_seed(cfg.seed, i)``, so any entry
    can be replayed with ``replay(cfg, seed)``.
    """
    t0 = time.perf_counter()
    if jobs > 1 and n > 1:
        step = (n + jobs - 1) // jobs
        parts = [(cfg, lo, min(n, lo + step)) for lo in range(0, n, step)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_chunk, parts))
        rep = FuzzReport()
        for r in reports:
            rep = rep.merge(r)
    else:
        rep = _chunk((cfg, 0, n))
    rep.seconds = time.perf_counter() - t0
    rep.config = {**asdict(cfg), "n": n}
    return rep


def replay(cfg: GenConfig, seed: int):
    """Regenerate and rerun the program for a reported seed."""
    term, A = gen_well_typed(replace(cfg, seed=seed))
    return term, A, run_term(term, cfg.fuel)
