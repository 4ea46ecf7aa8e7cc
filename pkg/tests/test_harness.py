from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from impobj.harness import (
    SPLIT_ONLY_WITNESS,
    CorpusError,
    GenConfig,
    GenerationFailed,
    bridge_program,
    check_program,
    closed_universe,
    encoding_sweep,
    fuzz_safety,
    gen_well_typed,
    load_corpus,
    load_manifest,
    oracle_sweep,
    parse_corpus_text,
    replay,
    run_corpus,
    soundness_bridge,
    split_only_witness,
    term_depth,
)
from impobj.harness.universe import enumerate_universe, render_manifest
from impobj.syntax import parse_term
from impobj.typecheck import check

# -- corpus -------------------------------------------------------------------


def test_corpus_checks_clean():
    rep = run_corpus()
    assert len(rep.files) >= 30
    assert rep.ok, [f.diagnostics for f in rep.failures]


def test_corpus_has_the_classic_examples():
    names = {p.name.removesuffix(".sigma") for p in load_corpus()}
    assert {"backup_retrieve_self", "backup_retrieve_mu", "list_node", "list_type"} <= names
    assert {f"rule_{r}" for r in ("obj", "inv", "upd", "clone", "beta", "tbeta", "unfold", "open")} <= names


def test_macros_expand_whole_words():
    prog = parse_corpus_text(
        "//!let A = [m:inv Top]\n//!let Am = A -> A\n//!expect: type = Am\nλ(x:A) x\n", "m"
    )
    assert prog.source.strip() == "λ(x:[m:inv Top]) x"
    assert check_program(prog).ok


def test_wrong_expectation_is_reported():
    prog = parse_corpus_text("//!expect: type = Top -> Bot\nλ(x:Top) x\n", "bad")
    res = check_program(prog)
    assert not res.ok and res.diagnostics


def test_wrong_step_count_is_reported():
    prog = parse_corpus_text("//!expect: outcome = value\n//!expect: steps = 3\n(λ(x:Top) x) (λ(y:Top) y)\n", "s")
    res = check_program(prog)
    assert not res.ok
    assert check_program(parse_corpus_text("//!expect: steps = 1\n(λ(x:Top) x) (λ(y:Top) y)\n", "s")).ok


def test_unknown_directive_key():
    with pytest.raises(CorpusError):
        parse_corpus_text("//!expect: colour = blue\nλ(x:Top) x\n", "c")


def test_bridge_on_corpus():
    progs = [p for p in load_corpus() if p.in_bridge]
    res = soundness_bridge(progs, k_max=3)
    typed = [r for r in res if r.typed]
    assert len(typed) >= 20
    assert all(r.ok for r in res), [r.to_json() for r in res if not r.ok][:1]


def test_bridge_skips_ill_typed_programs():
    prog = parse_corpus_text("(obj [] {}).m\n", "x")
    r = bridge_program(prog, k_max=2)
    assert not r.typed and r.ok


# -- generator and fuzzing ----------------------------------------------------


@given(st.integers(0, 10_000), st.integers(1, 6))
@settings(max_examples=40)
def test_generated_programs_respect_bounds(seed, depth):
    cfg = GenConfig(max_term_depth=depth, seed=seed)
    try:
        t, A = gen_well_typed(cfg)
    except GenerationFailed:
        return
    assert term_depth(t) <= depth
    assert check(None, t, A)


def test_generation_is_seeded():
    cfg = GenConfig(seed=42)
    assert gen_well_typed(cfg) == gen_well_typed(cfg)


def test_generator_rejects_bad_config():
    with pytest.raises(ValueError):
        GenConfig(max_term_depth=0)
    with pytest.raises(ValueError):
        GenConfig(mutation="nope")


def test_small_fuzz_run_is_safe():
    rep = fuzz_safety(GenConfig(seed=3), 80)
    assert rep.generated == 80 and rep.stuck == 0
    assert sum(rep.outcomes.values()) == rep.typechecked
    assert "Red-Obj" in rep.rules


@pytest.mark.parametrize("mutation", ["drop-inv-variance", "drop-upd-variance", "covariant-upd-body", "width-reversed-subobj"])
def test_mutated_checker_lets_stuck_programs_through(mutation):
    cfg = GenConfig(seed=1, mutation=mutation)
    rep = fuzz_safety(cfg, 200)
    assert rep.stuck > 0
    f = rep.failures[0]
    _, _, tr = replay(cfg, f.seed)
    assert tr.outcome == "stuck"


def test_parallel_fuzz_matches_serial():
    cfg = GenConfig(seed=9)
    a, b = fuzz_safety(cfg, 30), fuzz_safety(cfg, 30, jobs=2)
    assert a.outcomes == b.outcomes and a.rules == b.rules


# -- universe, oracle, sweeps -------------------------------------------------


def test_manifest_counts():
    levels = load_manifest()
    assert [len(l) for l in levels] == [3451, 549, 57, 9]
    assert len(closed_universe()) == 3451


def test_manifest_matches_fresh_enumeration():
    from impobj.harness.universe import manifest_path

    assert manifest_path().read_text() == render_manifest(enumerate_universe())


def test_oracle_sweep_on_a_slice():
    rep = oracle_sweep(closed_universe()[::60])
    assert rep.ok and rep.pairs == len(closed_universe()[::60]) ** 2
    assert 0 < rep.yes < rep.pairs


def test_encoding_sweep_on_a_slice():
    rep = encoding_sweep(closed_universe()[::60])
    assert rep.ok


def test_split_only_witness():
    assert split_only_witness() == (True, False)
    parse_term(SPLIT_ONLY_WITNESS)


def test_fuzz_report_json():
    rep = fuzz_safety(replace(GenConfig(), seed=5), 5)
    j = rep.to_json()
    assert j["ok"] and j["generated"] == 5 and set(j["outcomes"]) == {"Value", "FuelExhausted", "Stuck"}
