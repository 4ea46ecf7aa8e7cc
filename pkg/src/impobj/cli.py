"""Command-line entry point.

Exit codes: 0 success, 1 negative verdict (parse or type error, stuck
program, counterexample), 2 resource verdict (fuel or budget exhausted),
3 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__

OK, NEGATIVE, RESOURCE, USAGE = 0, 1, 2, 3
COMMANDS = ("parse", "check", "eval", "fuzz", "lemma", "encode", "desugar", "corpus")


def schema(command: str) -> dict:
    """The JSON schema that ``command --json`` output conforms to (one line for ``lemma``)."""
    from importlib import resources

    if command not in COMMANDS:
        raise KeyError(command)
    return json.loads((resources.files("impobj") / "schemas" / f"{command}.schema.json").read_text(encoding="utf-8"))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------


def _read_source(args) -> str:
    if getattr(args, "expr", None) is not None:
        text = args.expr
        name = "<expr>"
    elif args.file is None:
        raise UsageError("no input: give a FILE or -e TEXT")
    elif args.file == "-":
        text, name = sys.stdin.read(), "<stdin>"
    else:
        p = Path(args.file)
        try:
            text = p.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise UsageError(f"cannot read {args.file}: {e}") from None
        name = p.name
    from .harness.corpus import CorpusError, parse_corpus_text

    try:
        return parse_corpus_text(text, name).source
    except CorpusError as e:
        raise UsageError(str(e)) from None


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False))
    elif human:
        print(human, end="" if human.endswith("\n") else "\n")


def _parse_input(args, as_type: bool):
    from .syntax import parse_term, parse_type

    src = _read_source(args)
    return (parse_type if as_type else parse_term)(src)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_parse(args) -> int:
    from .syntax import ParseError, print_term, print_type, to_json

    try:
        node = _parse_input(args, args.type)
    except ParseError as e:
        _emit(args, {"command": "parse", "ok": False, "error": str(e)}, "")
        print(f"parse error: {e}", file=sys.stderr)
        return NEGATIVE
    text = print_type(node) if args.type else print_term(node)
    _emit(args, {"command": "parse", "ok": True, "kind": "type" if args.type else "term", "printed": text, "ast": to_json(node)}, text)
    return OK


def cmd_check(args) -> int:
    from .syntax import ParseError, print_type
    from .typecheck import TypeErr, TypeFuelExhausted, typeof

    try:
        t = _parse_input(args, False)
    except ParseError as e:
        _emit(args, {"command": "check", "status": "parse-error", "mode": args.mode, "error": str(e)}, "")
        print(f"parse error: {e}", file=sys.stderr)
        return NEGATIVE
    try:
        A = typeof(None, t, args.mode, args.fuel)
    except TypeErr as e:
        lines = e.render() if args.explain else f"type error in rule {e.rule}: {e.msg}"
        _emit(args, {"command": "check", "status": "ill-typed", "mode": args.mode, "rule": e.rule, "error": e.msg, "explanation": e.explanation}, "")
        print(lines, file=sys.stderr)
        return NEGATIVE
    except TypeFuelExhausted as e:
        _emit(args, {"command": "check", "status": "fuel-exhausted", "mode": args.mode, "error": str(e)}, "")
        print(f"unknown: {e}", file=sys.stderr)
        return RESOURCE
    _emit(args, {"command": "check", "status": "ok", "mode": args.mode, "type": print_type(A)}, print_type(A))
    return OK


def cmd_eval(args) -> int:
    from .eval import make_allocator, outcome_label, run_term
    from .syntax import ParseError, print_term

    try:
        t = _parse_input(args, False)
    except ParseError as e:
        _emit(args, {"command": "eval", "outcome": "ParseError", "error": str(e)}, "")
        print(f"parse error: {e}", file=sys.stderr)
        return NEGATIVE
    try:
        alloc = make_allocator(args.alloc)
    except ValueError as e:
        raise UsageError(str(e)) from None
    tr = run_term(t, args.fuel, alloc)
    label = outcome_label(tr.outcome, tr.reason)
    if args.json:
        out = {"command": "eval", **tr.to_json(), "label": label}
        if not args.trace:
            out["steps"] = [{"rule": s["rule"]} for s in out["steps"]]
        print(json.dumps(out, ensure_ascii=False))
    elif args.trace:
        print(tr.render(), end="")
    else:
        print(print_term(tr.final.term))
        print(f"{label} after {len(tr)} steps")
    return {"value": OK, "stuck": NEGATIVE, "fuel": RESOURCE}[tr.outcome]


def cmd_fuzz(args) -> int:
    from .harness import GenConfig, fuzz_safety

    try:
        cfg = GenConfig(max_term_depth=args.depth, fuel=args.fuel, seed=args.seed, mode=args.mode, mutation=args.mutate)
    except ValueError as e:
        raise UsageError(str(e)) from None
    rep = fuzz_safety(cfg, args.n, args.jobs)
    payload = {"command": "fuzz", **rep.to_json()}
    if args.report:
        Path(args.report).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    lines = [rep.summary(), f"{rep.seconds:.1f}s"]
    for f in rep.failures[:10]:
        lines.append(f"stuck: seed {f.seed}: {f.program} ({f.reason})")
    _emit(args, payload, "\n".join(lines))
    return OK if rep.ok else NEGATIVE


def _lemma_job(job):
    from .stepmodel import Budget, check_lemma

    name, mutation, k, seed, samples = job
    return check_lemma(name, Budget(k_max=k, seed=seed, samples=samples), mutation)


def cmd_lemma(args) -> int:
    from .stepmodel import COUNTEREXAMPLE, INCONCLUSIVE, UnknownLemma, UnknownMutation, default_mutation, lemma_for_mutation, lemma_names
    from .stepmodel.lemmas import get_lemma

    if args.list:
        for n in lemma_names():
            lem = get_lemma(n)
            muts = f"  mutations: {', '.join(lem.mutations)}" if lem.mutations else ""
            print(f"{n} [{lem.group}]{muts}")
        return OK
    if not args.lemma:
        raise UsageError("--lemma NAME is required (or --list)")
    jobs = []
    try:
        if args.lemma != "all":
            names = [args.lemma]
        elif args.mutate:
            names = [lemma_for_mutation(args.mutate)]
        else:
            names = lemma_names()
        for n in names:
            get_lemma(n)
            mut = args.mutate
            if mut == "":
                if args.lemma == "all":
                    raise UsageError("--mutate needs an explicit name with --lemma all")
                mut = default_mutation(n)
            if mut is not None and mut not in get_lemma(n).mutations:
                raise UnknownMutation(f"lemma {n} has no mutation {mut!r}")
            jobs.append((n, mut, args.budget, args.seed, args.samples))
    except (UnknownLemma, UnknownMutation) as e:
        raise UsageError(str(e.args[0] if e.args else e)) from None

    if args.jobs > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            reports = list(ex.map(_lemma_job, jobs))
    else:
        reports = [_lemma_job(j) for j in jobs]

    worst = OK
    for rep in reports:
        c = rep.counts()
        if args.json:
            for r in rep.results:
                print(json.dumps(r.to_json(), ensure_ascii=False))
        else:
            tag = f" (mutation {rep.mutation})" if rep.mutation else ""
            print(f"{rep.lemma}{tag}: {rep.verdict.kind}  " + ", ".join(f"{k} {v}" for k, v in c.items()))
            for r in rep.counterexamples[:3]:
                why = r.conclusion[1] if r.conclusion else None
                print(f"  instance {r.index} {r.params}: {why}")
        kind = rep.verdict.kind
        if kind == COUNTEREXAMPLE:
            worst = NEGATIVE
        elif kind == INCONCLUSIVE and worst == OK:
            worst = RESOURCE
    return worst


def cmd_encode(args) -> int:
    from .syntax import ParseError, map_term_types, print_term, print_type
    from .typecheck import encode_to_split

    try:
        node = _parse_input(args, args.type)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return NEGATIVE
    enc = lambda A: encode_to_split(A, strict=False)  # noqa: E731
    if args.type:
        out = print_type(enc(node))
    else:
        from .syntax import desugar_self_in_term

        out = print_term(map_term_types(desugar_self_in_term(node), enc))
    _emit(args, {"command": "encode", "kind": "type" if args.type else "term", "input": _printed(node, args.type), "output": out}, out)
    return OK


def cmd_desugar(args) -> int:
    from .syntax import ParseError, desugar_self, desugar_self_in_term, print_term, print_type

    try:
        node = _parse_input(args, args.type)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return NEGATIVE
    out = print_type(desugar_self(node)) if args.type else print_term(desugar_self_in_term(node))
    _emit(args, {"command": "desugar", "kind": "type" if args.type else "term", "input": _printed(node, args.type), "output": out}, out)
    return OK


def cmd_corpus(args) -> int:
    from .harness import run_corpus, soundness_bridge, load_corpus

    rep = run_corpus(args.path)
    payload = {"command": "corpus", **rep.to_json()}
    lines = [f"{'ok  ' if f.ok else 'FAIL'} {f.name}" + ("".join(f"\n     {d}" for d in f.diagnostics)) for f in rep.files]
    ok = rep.ok
    if args.bridge:
        br = soundness_bridge(load_corpus(args.path), k_max=args.budget)
        payload["bridge"] = [b.to_json() for b in br]
        for b in br:
            if b.typed:
                lines.append(f"bridge {'ok  ' if b.ok else 'FAIL'} {b.name}")
        ok = ok and all(b.ok for b in br)
    lines.append(f"{sum(f.ok for f in rep.files)}/{len(rep.files)} files passed")
    _emit(args, payload, "\n".join(lines))
    return OK if ok else NEGATIVE


def _printed(node, as_type: bool) -> str:
    from .syntax import print_term, print_type

    return print_type(node) if as_type else print_term(node)


# ---------------------------------------------------------------------------
# Parser and configuration
# ---------------------------------------------------------------------------


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", nargs="?", help="program file (UTF-8); '-' reads stdin")
    p.add_argument("-e", "--expr", help="program text given inline")


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _nonneg(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    from .typecheck import DEFAULT_FUEL, MODES, MUTATIONS

    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--config", metavar="PATH", help="key=value defaults (command-line flags win)")
    common.add_argument("--jobs", type=_positive, default=1, help="worker processes for fuzz and lemma")

    ap = _Parser(prog="impobj", description="Imperative object calculus toolkit: parser, evaluator, type checker and semantic model.")
    ap.add_argument("--version", action="version", version=f"impobj {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("parse", parents=[common], help="parse and pretty-print a term or type")
    _add_input(p)
    p.add_argument("--type", action="store_true", help="input is a type")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", parents=[common], help="type-check a closed program")
    _add_input(p)
    p.add_argument("--mode", choices=MODES, default="variance")
    p.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL, help="subtyping fuel")
    p.add_argument("--explain", action="store_true", help="print the failing premise chain")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", parents=[common], help="run a program")
    _add_input(p)
    p.add_argument("--fuel", type=_nonneg, default=500, help="maximum number of steps")
    p.add_argument("--trace", action="store_true", help="print every step")
    p.add_argument("--alloc", default="canonical", help="canonical or random:SEED")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fuzz", parents=[common], help="safety fuzzing of generated well-typed programs")
    p.add_argument("--n", type=_positive, default=1000, help="number of programs")
    p.add_argument("--fuel", type=_positive, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=_positive, default=6, help="maximum term depth")
    p.add_argument("--mode", choices=MODES, default="variance")
    p.add_argument("--mutate", choices=sorted(MUTATIONS), help="deliberately unsound checker variant")
    p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("lemma", parents=[common], help="check a semantic lemma within a budget")
    p.add_argument("--lemma", metavar="NAME", help="lemma name, or 'all'")
    p.add_argument("--budget", type=_nonneg, default=5, metavar="K", help="maximum step index")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=_positive, default=3, help="instances drawn per quantifier")
    p.add_argument("--mutate", nargs="?", const="", default=None, metavar="NAME", help="check a mutated statement (default: the lemma's first)")
    p.add_argument("--list", action="store_true", help="list lemmas and their mutations")
    p.set_defaults(func=cmd_lemma)

    for name, func, helptext in (
        ("encode", cmd_encode, "encode variance annotations as (write, read) pairs"),
        ("desugar", cmd_desugar, "expand self types into recursive existentials"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _add_input(p)
        p.add_argument("--type", action="store_true", help="input is a type")
        p.set_defaults(func=func)

    p = sub.add_parser("corpus", parents=[common], help="run the regression corpus")
    p.add_argument("path", nargs="?", help="corpus directory or file (default: shipped corpus)")
    p.add_argument("--bridge", action="store_true", help="also run the soundness bridge")
    p.add_argument("--budget", type=_nonneg, default=5, metavar="K")
    p.set_defaults(func=cmd_corpus)
    return ap


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config(path: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    for i, line in enumerate(lines, 1):
        s = line.split("#", 1)[0].strip()
        if not s or (s.startswith("[") and s.endswith("]")):
            continue
        if "=" not in s:
            raise UsageError(f"{path}:{i}: expected key = value")
        k, v = (x.strip() for x in s.split("=", 1))
        v = v[1:-1] if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'" else v
        out[k.replace("-", "_")] = v
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str], cfg: Dict[str, str]) -> None:
    """Install config values as defaults of the chosen subcommand."""
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    cmd = next((a for a in argv if a in sub_action.choices), None)
    if cmd is None:
        return
    sp = sub_action.choices[cmd]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for k, v in cfg.items():
        a = actions.get(k)
        if a is None or k in ("help", "config", "func"):
            raise UsageError(f"config key {k!r} is not an option of {cmd}")
        if isinstance(a, argparse._StoreTrueAction):
            if v.lower() not in _TRUE | _FALSE:
                raise UsageError(f"config key {k!r} expects a boolean")
            defaults[k] = v.lower() in _TRUE
        else:
            try:
                val = a.type(v) if a.type else v
            except (ValueError, argparse.ArgumentTypeError) as e:
                raise UsageError(f"config key {k!r}: {e}") from None
            if a.choices is not None and val not in a.choices:
                raise UsageError(f"config key {k!r}: {val!r} not in {sorted(a.choices)}")
            defaults[k] = val
    sp.set_defaults(**defaults)


def _config_path(argv: Sequence[str]) -> Optional[str]:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        path = _config_path(argv)
        if path is not None:
            _apply_config(parser, argv, read_config(path))
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:  # --help / --version
            return OK if e.code in (0, None) else USAGE
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            print("impobj: error: a command is required", file=sys.stderr)
            return USAGE
        return args.func(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return USAGE
    except RecursionError:
        print("impobj: term nesting exceeds the recursion limit", file=sys.stderr)
        return RESOURCE
    except BrokenPipeError:
        return OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
