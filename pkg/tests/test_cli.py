import json
import subprocess
import sys
from pathlib import Path

import pytest

from cfaudit import corpus
from cfaudit.cli import main

MODELS = Path(__file__).resolve().parents[1] / "src" / "cfaudit" / "models"


def path(name):
    return str(MODELS / f"{name}{corpus.SUFFIX}")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    assert code in (0, 1, 2, 3)
    return code, out, err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", path("structure_b"))
    assert code == 0 and "ok (model structure_b)" in out


def test_validate_cycle(tmp_path, capsys):
    f = tmp_path / "cycle.scm.txt"
    f.write_text("model m { variable V1 { domain {a} fn V2 } variable V2 { domain {a} fn V1 } }")
    code, _, err = run(capsys, "validate", f)
    assert code == 2
    assert f"{f}:1:" in err and "cycle: V1↔V2" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/model.scm.txt")
    assert code == 2 and "file not found" in err


def test_query_counterfactual_shift(capsys):
    code, out, _ = run(
        capsys, "query", path("scenario_2"),
        "--evidence", "skin_color=b", "profile=p", "--do", "skin_color=w", "--query", "similarity_pred",
    )
    assert code == 0
    lines = out.split("\n")
    assert lines[1].split() == ["high", "1"] and lines[2].split() == ["low", "0"]


def test_query_without_evidence_is_the_marginal(capsys):
    code, out, _ = run(capsys, "query", path("structure_a"), "--query", "ses")
    assert code == 0
    assert out.split("\n")[1:3] == ["low   0.4", "high  0.6"]


def test_query_with_oracle(capsys):
    code, out, _ = run(capsys, "query", path("structure_b"), "--evidence", "acuity=poor", "--query", "accident", "--oracle")
    assert code == 0
    dev = float(out.strip().split("\n")[-1].split(":")[1])
    assert dev <= 1e-9


def test_query_unknown_intervention(capsys):
    code, _, err = run(capsys, "query", path("scenario_1"), "--do", "height=tall", "--query", "profile")
    assert code == 2 and "height" in err


def test_query_bad_pair(capsys):
    code, _, err = run(capsys, "query", path("scenario_1"), "--do", "skin_color", "--query", "profile")
    assert code == 2 and "name=value" in err


def test_query_impossible_evidence(capsys):
    code, _, _ = run(
        capsys, "query", path("scenario_1"),
        "--evidence", "skin_color=b", "is_offender_lookalike=yes", "--query", "profile",
    )
    assert code == 3


def test_audit_scenario_1_cf(capsys):
    code, out, _ = run(capsys, "audit", path("scenario_1"), "--criterion", "cf")
    assert code == 0 and "counterfactual_fairness: satisfied (0 witnesses" in out


def test_audit_scenario_2_all(capsys):
    code, out, _ = run(capsys, "audit", path("scenario_2"), "--format", "json")
    assert code == 1
    doc = json.loads(out)
    verdicts = {s["criterion"]: s["verdict"] for s in doc["summary"]}
    assert verdicts == {
        "counterfactual_fairness": "violated",
        "causal_relevance_fairness": "satisfied",
        "strict_causal_relevance_fairness": "satisfied",
        "wrongful_discrimination": "satisfied",
    }


def test_audit_structure_d_clean(capsys):
    code, _, _ = run(capsys, "audit", path("structure_d"), "--criterion", "all")
    assert code == 0


@pytest.mark.parametrize("name", corpus.NAMES)
def test_text_and_json_agree(capsys, name):
    c1, text, _ = run(capsys, "audit", path(name))
    c2, raw, _ = run(capsys, "audit", path(name), "--format", "json")
    assert c1 == c2
    for c in json.loads(raw)["criteria"]:
        assert f"{c['criterion']}: {c['verdict']} ({c['witness_count']} witnesses" in text


def test_json_report_shape(capsys):
    _, raw, _ = run(capsys, "audit", path("structure_b"), "--format", "json", "--criterion", "crf-strict")
    doc = json.loads(raw)
    assert doc["roles"] == {
        "protected": "impairment",
        "features": ["acuity", "night_vision"],
        "predictor": "risk_pred",
        "target": "accident",
    }
    (c,) = doc["criteria"]
    assert c["criterion"] == "strict_causal_relevance_fairness" and c["witness_count"] == len(c["witnesses"]) > 0
    w = c["witnesses"][0]
    assert set(w) == {"context", "a_prime", "predictor_effect", "target_effect", "differential_treatment"}
    e = doc["effects"][0]
    assert set(e["predictor"]["signed"]) == {"elevated", "baseline"}


def test_tolerance_env_and_flag(capsys, monkeypatch):
    # structure_b predictor effects are 4/7 or 0, target effects 0.8
    monkeypatch.setenv("CF_AUDIT_TOLERANCE", "0.9")
    code, out, _ = run(capsys, "audit", path("structure_b"))
    assert code == 0 and "tolerance 0.9" in out
    code, out, _ = run(capsys, "audit", path("structure_b"), "--tolerance", "1e-9")
    assert code == 1 and "tolerance 1e-09" in out
    monkeypatch.setenv("CF_AUDIT_TOLERANCE", "lots")
    code, _, err = run(capsys, "audit", path("structure_b"))
    assert code == 2 and "CF_AUDIT_TOLERANCE" in err


def test_negative_tolerance(capsys):
    code, _, _ = run(capsys, "audit", path("structure_b"), "--tolerance", "-1")
    assert code == 2


def test_corpus_list(capsys):
    code, out, _ = run(capsys, "corpus", "--list")
    assert code == 0
    assert [line.split()[0] for line in out.strip().split("\n")] == list(corpus.NAMES)


def test_corpus_emit_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "corpus", "--emit", a)[0] == 0
    assert run(capsys, "corpus", "--emit", b)[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(n + corpus.SUFFIX for n in corpus.NAMES)
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes() == (MODELS / n).read_bytes()


def test_emit_into_a_file_path_fails(tmp_path, capsys):
    f = tmp_path / "occupied"
    f.write_text("x")
    assert run(capsys, "corpus", "--emit", f)[0] == 2


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cfaudit", "audit", path("scenario_1"), "--criterion", "crf-strict"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert "strict_causal_relevance_fairness: violated" in proc.stdout
