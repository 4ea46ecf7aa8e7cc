import json
import subprocess
import sys

import jsonschema
import pytest

from impobj import cli
from impobj.harness import default_corpus_dir

CORPUS = default_corpus_dir()


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, command, *argv):
    code, out, _ = run(capsys, command, *argv, "--json")
    lines = [json.loads(l) for l in out.splitlines() if l.strip()]
    schema = cli.schema(command)
    for doc in lines:
        jsonschema.validate(doc, schema)
    return code, lines


@pytest.mark.parametrize(
    "argv",
    [
        ("parse", "-e", "λ(x:Top) x"),
        ("parse", "--type", "-e", "Obj(X)[m:inv X]"),
        ("check", CORPUS / "split_only.sigma", "--mode", "split"),
        ("check", CORPUS / "split_only.sigma"),
        ("check", "-e", "λ(x:Top"),
        ("eval", CORPUS / "stuck.sigma"),
        ("eval", CORPUS / "diverge.sigma", "--fuel", "20"),
        ("eval", CORPUS / "backup_retrieve_self.sigma", "--trace"),
        ("fuzz", "--n", "5"),
        ("lemma", "--lemma", "SemApp", "--budget", "2"),
        ("lemma", "--lemma", "SemInv", "--budget", "3", "--mutate"),
        ("encode", "--type", "-e", "[m:cov Top]"),
        ("encode", "-e", "λ(x:[m:con Top]) x"),
        ("desugar", "--type", "-e", "Obj(X)[m:inv X]"),
        ("corpus", CORPUS / "rule_beta.sigma"),
    ],
)
def test_json_output_matches_schema(capsys, argv):
    code, docs = run_json(capsys, *argv)
    assert docs and code in (0, 1, 2)


def test_check_exit_codes(capsys):
    assert run(capsys, "check", CORPUS / "split_only.sigma", "--mode", "split")[0] == cli.OK
    code, _, err = run(capsys, "check", CORPUS / "split_only.sigma", "--explain")
    assert code == cli.NEGATIVE
    assert run(capsys, "check", "-e", "λ(x:Top")[0] == cli.NEGATIVE


def test_eval_exit_codes(capsys):
    code, out, _ = run(capsys, "eval", CORPUS / "stuck.sigma", "--trace")
    assert code == cli.NEGATIVE and "Red-Obj" in out
    assert run(capsys, "eval", CORPUS / "diverge.sigma", "--fuel", "30")[0] == cli.RESOURCE
    assert run(capsys, "eval", CORPUS / "rule_beta.sigma")[0] == cli.OK


def test_eval_allocators_agree_on_outcome(capsys):
    _, a = run_json(capsys, "eval", CORPUS / "clone_independent.sigma")
    _, b = run_json(capsys, "eval", CORPUS / "clone_independent.sigma", "--alloc", "random:4")
    assert a[0]["outcome"] == b[0]["outcome"] and a[0]["length"] == b[0]["length"]


def test_lemma_exit_codes(capsys):
    assert run(capsys, "lemma", "--lemma", "SemSubVarRef", "--budget", "4", "--seed", "7")[0] == cli.OK
    assert run(capsys, "lemma", "--lemma", "SemInv", "--mutate")[0] == cli.NEGATIVE
    assert run(capsys, "lemma", "--lemma", "NoSuchLemma")[0] == cli.USAGE
    code, out, _ = run(capsys, "lemma", "--list")
    assert code == cli.OK and "SemSubVarRef" in out


def test_lemma_parallel_matches_serial(capsys):
    _, a = run_json(capsys, "lemma", "--lemma", "SemSubCovRef", "--budget", "3")
    _, b = run_json(capsys, "lemma", "--lemma", "SemSubCovRef", "--budget", "3", "--jobs", "2")
    assert [d["outcome"] for d in a] == [d["outcome"] for d in b]


def test_fuzz_writes_report(capsys, tmp_path):
    path = tmp_path / "rep.json"
    assert run(capsys, "fuzz", "--n", "10", "--seed", "2", "--report", path)[0] == cli.OK
    rep = json.loads(path.read_text())
    assert rep["generated"] == 10 and rep["stuck"] == 0


def test_fuzz_with_mutation_fails(capsys):
    assert run(capsys, "fuzz", "--n", "200", "--seed", "1", "--mutate", "drop-upd-variance")[0] == cli.NEGATIVE


def test_usage_errors(capsys):
    assert run(capsys)[0] == cli.USAGE
    assert run(capsys, "frobnicate")[0] == cli.USAGE
    assert run(capsys, "check")[0] == cli.USAGE
    assert run(capsys, "check", "/no/such/file")[0] == cli.USAGE
    assert run(capsys, "eval", "-e", "x", "--fuel", "-1")[0] == cli.USAGE


def test_stdin_input(capsys, monkeypatch):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO("(λ(x:Top) x) (λ(y:Top) y)"))
    assert run(capsys, "eval", "-")[0] == cli.OK


def test_config_file_defaults_and_precedence(capsys, tmp_path):
    cfg = tmp_path / "impobj.conf"
    cfg.write_text("# defaults\n[eval]\nfuel = 3\n")
    assert run(capsys, "eval", CORPUS / "backup_retrieve_self.sigma", "--config", cfg)[0] == cli.RESOURCE
    assert run(capsys, "eval", CORPUS / "backup_retrieve_self.sigma", "--config", cfg, "--fuel", "100")[0] == cli.OK
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    assert run(capsys, "eval", CORPUS / "rule_beta.sigma", "--config", bad)[0] == cli.USAGE


def test_corpus_command(capsys):
    code, docs = run_json(capsys, "corpus")
    assert code == cli.OK and docs[0]["passed"] >= 30


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "impobj", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("impobj ")


def test_every_command_has_a_schema():
    for c in cli.COMMANDS:
        assert cli.schema(c)["$schema"].startswith("https://json-schema.org/")


def test_overly_deep_terms_are_a_resource_error(capsys):
    src = "λ(y:Top) y"
    for _ in range(4000):
        src = f"(λ(x:Top) x) ({src})"
    assert run(capsys, "parse", "-e", src)[0] == cli.RESOURCE
