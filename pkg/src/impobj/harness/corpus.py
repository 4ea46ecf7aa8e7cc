"""Regression corpus: programs with embedded ``//!`` assertions.

A corpus file is a program in the concrete grammar.  Lines starting with
``//!`` carry directives:

``//!let NAME = text``
    textual macro, expanded (whole-word) in the program and in later
    directives, in order of definition.
``//!expect: key = value``
    an assertion.  Keys:

    ``type``             synthesized type in variance mode (alpha-equivalent)
    ``split-type``       synthesized type in split mode
    ``ill-typed``        rejected in variance mode (value ignored)
    ``split-ill-typed``  rejected in split mode
    ``outcome``          Value, FuelExhausted or Stuck
    ``steps``            exact trace length
    ``result``           final term (alpha-equivalent, locations compared by name)
    ``rules``            space-separated rule names of the whole trace
    ``fuel``             evaluation fuel for the checks above (default 500)
    ``golden``           file name (relative) holding the rendered trace
    ``bridge``           ``off`` to exclude the file from the soundness bridge
"""
from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

from ..eval import Config, run_term, safe_k
from ..syntax import ParseError, alpha_eq, desugar_self, parse_term, parse_type, print_term, print_type
from ..syntax.ast import Term
from ..typecheck import SPLIT, VARIANCE, TypeErr, TypeFuelExhausted, encode_to_split, prepare, typeof

DEFAULT_FUEL = 500
BRIDGE_K = 5
KEYS = frozenset(
    {"type", "split-type", "ill-typed", "split-ill-typed", "outcome", "steps", "result", "rules", "fuel", "golden", "bridge"}
)

_LET = re.compile(r"^//!let\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_EXPECT = re.compile(r"^//!expect:\s*([a-z-]+)\s*(?:=\s*(.*))?$")


class CorpusError(ValueError):
    pass


@dataclass
class CorpusProgram:
    name: str
    source: str
    expect: Dict[str, str]
    path: Optional[Path] = None

    def term(self) -> Term:
        return parse_term(self.source)

    @property
    def fuel(self) -> int:
        return int(self.expect.get("fuel", DEFAULT_FUEL))

    @property
    def in_bridge(self) -> bool:
        return self.expect.get("bridge", "on") != "off"


def _expand(text: str, macros: List[Tuple[str, str]]) -> str:
    for name, body in reversed(macros):
        text = re.sub(rf"\b{re.escape(name)}\b", lambda _m, b=body: b, text)
    return text


def parse_corpus_text(text: str, name: str = "<string>", path: Optional[Path] = None) -> CorpusProgram:
    macros: List[Tuple[str, str]] = []
    expect: Dict[str, str] = {}
    body: List[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("//!"):
            m = _LET.match(s)
            if m:
                macros.append((m.group(1), _expand(m.group(2).strip(), macros)))
                continue
            m = _EXPECT.match(s)
            if not m:
                raise CorpusError(f"{name}:{lineno}: malformed directive {s!r}")
            key, val = m.group(1), (m.group(2) or "").strip()
            if key not in KEYS:
                raise CorpusError(f"{name}:{lineno}: unknown expectation key {key!r}")
            expect[key] = _expand(val, macros)
        else:
            body.append(line)
    return CorpusProgram(name, _expand("\n".join(body), macros), expect, path)


def load_file(path: Union[str, Path]) -> CorpusProgram:
    p = Path(path)
    return parse_corpus_text(p.read_text(encoding="utf-8"), p.name, p)


def default_corpus_dir() -> Path:
    return Path(str(resources.files("impobj.harness") / "corpus"))


def corpus_files(path: Union[str, Path, None] = None) -> List[Path]:
    p = Path(path) if path is not None else default_corpus_dir()
    if p.is_file():
        return [p]
    return sorted(p.glob("*.sigma"))


def load_corpus(path: Union[str, Path, None] = None) -> List[CorpusProgram]:
    return [load_file(f) for f in corpus_files(path)]


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------


@dataclass
class FileResult:
    name: str
    ok: bool = True
    diagnostics: List[str] = field(default_factory=list)
    type: Optional[str] = None
    outcome: Optional[str] = None
    steps: Optional[int] = None

    def fail(self, msg: str) -> None:
        self.ok = False
        self.diagnostics.append(msg)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "diagnostics": self.diagnostics,
            "type": self.type,
            "outcome": self.outcome,
            "steps": self.steps,
        }


@dataclass
class CorpusReport:
    files: List[FileResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(f.ok for f in self.files)

    @property
    def failures(self) -> List[FileResult]:
        return [f for f in self.files if not f.ok]

    def to_json(self) -> dict:
        return {
            "files": [f.to_json() for f in self.files],
            "passed": sum(f.ok for f in self.files),
            "failed": len(self.failures),
            "ok": self.ok,
            "seconds": round(self.seconds, 3),
        }


_OUTCOME = {"value": "Value", "fuel": "FuelExhausted", "stuck": "Stuck"}


def _typeof(t: Term, mode: str) -> Tuple[Optional[object], Optional[str]]:
    try:
        return typeof(None, t, mode), None
    except (TypeErr, TypeFuelExhausted) as e:
        return None, str(e)


def check_program(prog: CorpusProgram) -> FileResult:
    res = FileResult(prog.name)
    ex = prog.expect
    try:
        t = prog.term()
    except ParseError as e:
        res.fail(f"parse error: {e}")
        return res

    for key, mode in (("type", VARIANCE), ("split-type", SPLIT)):
        ill = "ill-typed" if mode == VARIANCE else "split-ill-typed"
        if key not in ex and ill not in ex:
            continue
        A, err = _typeof(t, mode)
        if mode == VARIANCE and A is not None:
            res.type = print_type(A)
        if ill in ex:
            if A is not None:
                res.fail(f"{mode}: expected a type error, got {print_type(A)}")
            continue
        if A is None:
            res.fail(f"{mode}: expected {ex[key]}, got type error: {err}")
            continue
        want = parse_type(ex[key])
        want = encode_to_split(want, strict=False) if mode == SPLIT else desugar_self(want)
        if not alpha_eq(want, A):
            res.fail(f"{mode}: expected {ex[key]}, got {print_type(A)}")

    if {"outcome", "steps", "result", "rules", "golden"} & ex.keys():
        tr = run_term(t, prog.fuel)
        res.outcome, res.steps = _OUTCOME[tr.outcome], len(tr)
        if "outcome" in ex and ex["outcome"] != res.outcome:
            res.fail(f"outcome: expected {ex['outcome']}, got {res.outcome} ({tr.reason})")
        if "steps" in ex and int(ex["steps"]) != len(tr):
            res.fail(f"steps: expected {ex['steps']}, got {len(tr)}")
        if "result" in ex and not alpha_eq(parse_term(ex["result"]), tr.final.term):
            res.fail(f"result: expected {ex['result']}, got {print_term(tr.final.term)}")
        if "rules" in ex:
            got = " ".join(s.rule for s in tr.steps)
            if got != " ".join(ex["rules"].split()):
                res.fail(f"rules: expected {ex['rules']}, got {got}")
        if "golden" in ex:
            if prog.path is None:
                res.fail("golden: no file path to resolve against")
            else:
                gp = prog.path.parent / ex["golden"]
                if not gp.exists():
                    res.fail(f"golden: missing {gp.name}")
                elif gp.read_text(encoding="utf-8") != tr.render():
                    res.fail(f"golden: trace differs from {gp.name}")
    return res


def run_corpus(path: Union[str, Path, None] = None) -> CorpusReport:
    """Check every ``*.sigma`` file under ``path`` (default: the shipped corpus)."""
    t0 = time.perf_counter()
    rep = CorpusReport()
    for f in corpus_files(path):
        try:
            prog = load_file(f)
        except (CorpusError, OSError, UnicodeDecodeError) as e:
            r = FileResult(f.name)
            r.fail(str(e))
            rep.files.append(r)
            continue
        rep.files.append(check_program(prog))
    rep.seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# Soundness bridge
# ---------------------------------------------------------------------------


@dataclass
class BridgeResult:
    name: str
    typed: bool
    type: Optional[str] = None
    verdicts: Dict[int, str] = field(default_factory=dict)
    safe: Optional[bool] = None
    witness: Optional[dict] = None

    @property
    def ok(self) -> bool:
        if not self.typed:
            return True
        return self.safe is True and all(v != "Counterexample" for v in self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "typed": self.typed,
            "type": self.type,
            "mem_term": {str(k): v for k, v in self.verdicts.items()},
            "safe": self.safe,
            "ok": self.ok,
            "witness": self.witness,
        }


def bridge_program(prog: CorpusProgram, k_max: int = BRIDGE_K, fuel: int = DEFAULT_FUEL, budget=None) -> BridgeResult:
    """A typed program must not refute its type in the model, nor get stuck."""
    from ..stepmodel import EMPTY_PSI, interp, mem_term
    from ..stepmodel.verdict import jsonable

    t = prog.term()
    A, _ = _typeof(t, VARIANCE)
    if A is None:
        return BridgeResult(prog.name, False)
    res = BridgeResult(prog.name, True, print_type(A))
    a, code = prepare(t), interp(A)
    for k in range(1, k_max + 1):
        v = mem_term(k, EMPTY_PSI, a, code, budget)
        res.verdicts[k] = v.kind
        if v.is_counterexample and res.witness is None:
            res.witness = jsonable(v.detail)
    res.safe = safe_k(Config({}, t), fuel)
    return res


def soundness_bridge(programs: Optional[Iterable[CorpusProgram]] = None, k_max: int = BRIDGE_K, fuel: int = DEFAULT_FUEL, budget=None) -> List[BridgeResult]:
    progs = list(programs) if programs is not None else load_corpus()
    return [bridge_program(p, k_max, fuel, budget) for p in progs if p.in_bridge]
