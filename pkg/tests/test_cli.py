import json

import pytest

from relaxmap.cli import CORPUS_ENV, EXIT_DATA, EXIT_ENFORCED, EXIT_FINDING, EXIT_USAGE, run


def call(capsys, *argv):
    code = run(list(map(str, argv)))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_behaviors_iriw(capsys, corpus_dir):
    code, out, _ = call(capsys, "behaviors", "--model", "armv8", "--json", corpus_dir / "iriw_addr.lit")
    assert code == 0
    doc = json.loads(out)
    bad = {"P1:a": 1, "P1:b": 0, "P2:c": 1, "P2:d": 0}
    assert not any(all(b["regs"][k] == v for k, v in bad.items()) for b in doc["behaviors"])


def test_check_exit_codes(capsys, corpus_dir):
    assert call(capsys, "check", "--model", "x86", corpus_dir / "sb.lit")[0] == 0
    assert call(capsys, "check", "--model", "sc", corpus_dir / "sb.lit")[0] == EXIT_FINDING


def test_verify_broken_ldr(capsys, corpus_dir):
    code, out, _ = call(capsys, "verify-mapping", "--from", "armv8", "--to", "armv7mca",
                        "--scheme", "broken-ldr", "--json", corpus_dir / "data_coi.lit")
    assert code == EXIT_FINDING
    assert json.loads(out)["sound"] is False
    code, _, _ = call(capsys, "verify-mapping", "--from", "armv8", "--to", "armv7mca",
                      corpus_dir / "data_coi.lit")
    assert code == 0


def test_map_text(capsys, corpus_dir):
    code, out, _ = call(capsys, "map", "--from", "x86", "--to", "armv8", corpus_dir / "sb_mfence.lit")
    assert code == 0 and "dmbfull" in out and out.startswith("arch armv8")


def test_fence_elim(capsys, tmp_path):
    f = tmp_path / "p.lit"
    f.write_text("arch x86\nthread P0 { X = 1; mfence; Y = 2 }\n")
    code, out, _ = call(capsys, "fence-elim", "--json", f)
    assert code == 0 and json.loads(out)["deleted"][0]["fence"] == "mfence"
    assert call(capsys, "fence-elim", "--arch", "armv8", f)[0] == EXIT_USAGE


def test_robust(capsys, corpus_dir):
    sb = corpus_dir / "sb.lit"
    assert call(capsys, "robust", "--m", "sc", "--k", "x86", sb)[0] == EXIT_FINDING
    code, out, _ = call(capsys, "robust", "--m", "sc", "--k", "x86", "--enforce", sb)
    assert code == EXIT_ENFORCED and "mfence" in out
    assert call(capsys, "robust", "--m", "sc", "--k", "x86", corpus_dir / "sb_mfence.lit")[0] == 0


def test_usage_and_data_errors(capsys, tmp_path):
    assert call(capsys, "behaviors", "--model", "nope", tmp_path / "x.lit")[0] == EXIT_USAGE
    assert call(capsys, "frobnicate")[0] == EXIT_USAGE
    assert call(capsys, "behaviors", "--model", "sc", tmp_path / "missing.lit")[0] == EXIT_DATA
    bad = tmp_path / "bad.lit"
    bad.write_text("arch x86\nthread P0 { = }\n")
    code, _, err = call(capsys, "behaviors", "--model", "sc", bad)
    assert code == EXIT_DATA and "LitmusSyntaxError" in err
    big = tmp_path / "big.lit"
    big.write_text("arch armv8\nthread P0 { X = 1; a = Y }\nthread P1 { Y = 1; b = X }\n")
    assert call(capsys, "behaviors", "--model", "armv8", "--max-candidates", "1", big)[0] == EXIT_DATA


def test_deterministic_output(capsys, corpus_dir):
    a = call(capsys, "behaviors", "--model", "armv7", corpus_dir / "ppo_cycle_v7.lit")[1]
    b = call(capsys, "behaviors", "--model", "armv7", corpus_dir / "ppo_cycle_v7.lit")[1]
    assert a == b


def test_corpus_run(capsys, corpus_dir, monkeypatch):
    monkeypatch.setenv(CORPUS_ENV, str(corpus_dir))
    code, out, _ = call(capsys, "corpus", "run", "--jobs", "1", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] == doc["total"] > 0


def test_corpus_needs_a_root(capsys, monkeypatch):
    monkeypatch.delenv(CORPUS_ENV, raising=False)
    assert call(capsys, "corpus", "run")[0] == EXIT_USAGE
