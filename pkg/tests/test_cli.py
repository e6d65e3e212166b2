import io
import json
import subprocess
import sys

import pytest

from modalwb.cli import DEMOS, LIMIT, OK, REFUTED, USAGE, run
from modalwb.proof import load_proof

LOOP = {"worlds": ["w"], "rel": [["w", "w"]], "val": {"p": ["w"]}}
CHAIN = {"worlds": ["a", "b"], "rel": [["a", "b"]], "val": {"p": ["b"]}}


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def loop_file(tmp_path):
    path = tmp_path / "loop.json"
    path.write_text(json.dumps(LOOP))
    return str(path)


@pytest.fixture
def chain_file(tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps(CHAIN))
    return str(path)


class TestFormulaCommands:
    def test_parse(self):
        code, out, _ = call("parse", "box p")
        assert code == OK
        assert "core:    ~dia ~p" in out

    def test_parse_box_convention(self):
        code, out, _ = call("parse", "dia p", "--convention", "box")
        assert code == OK and "~box ~p" in out

    def test_sub_under_box(self):
        code, out, _ = call("sub", "dia box p", "--convention", "box")
        assert code == OK
        assert out.splitlines()[0].endswith("5 formulas")
        assert len(out.splitlines()) == 6

    def test_sub_plus(self):
        code, out, _ = call("sub", "p", "--plus")
        assert code == OK and "2 formulas" in out

    def test_syntax_error_is_usage(self):
        code, _, err = call("parse", "p ->")
        assert code == USAGE and "error" in err

    def test_unknown_command(self):
        code, _, err = call("frobnicate")
        assert code == USAGE and "invalid choice" in err


class TestModelCommands:
    def test_eval_standard(self, loop_file):
        code, out, _ = call("eval", "dia p", "--model", loop_file, "--world", "w")
        assert code == OK and ": true (standard)" in out

    def test_eval_nonstandard_refutes_dia(self, loop_file):
        code, out, _ = call("eval", "dia p", "--model", loop_file, "--world", "w", "--nonstandard")
        assert code == REFUTED and ": false (nonstandard)" in out

    def test_unknown_world(self, loop_file):
        code, _, _ = call("eval", "p", "--model", loop_file, "--world", "nope")
        assert code == USAGE

    def test_missing_model_file(self, tmp_path):
        code, _, _ = call("eval", "p", "--model", str(tmp_path / "absent.json"), "--world", "w")
        assert code == USAGE

    def test_valid(self):
        code, out, _ = call("valid", "box (p -> q) -> box p -> box q", "--max-worlds", "2")
        assert code == OK and "VALID" in out

    def test_refuted_prints_countermodel(self):
        code, out, _ = call("valid", "p -> box p", "--max-worlds", "2")
        assert code == REFUTED
        assert "REFUTED" in out and '"worlds"' in out

    def test_euclidean_frame(self):
        code, _, _ = call("valid", "dia p -> box dia p", "--frame", "euclidean", "--max-worlds", "3")
        assert code == OK

    def test_nonstandard_dual(self):
        code, _, _ = call("valid", "dia p <-> ~box ~p", "--max-worlds", "1", "--nonstandard")
        assert code == REFUTED

    def test_budget_exhaustion(self, monkeypatch):
        monkeypatch.setenv("MODAL_BUDGET", "5")
        code, _, err = call("valid", "dia p", "--max-worlds", "4")
        assert code == LIMIT and "resource limit" in err

    def test_filtrate(self, chain_file):
        code, out, _ = call("filtrate", "--model", chain_file, "--sigma", "dia p", "--close")
        assert code == OK
        assert "FILTRATION THEOREM PASS" in out

    def test_filtrate_largest(self, chain_file):
        code, out, _ = call("filtrate", "--model", chain_file, "--sigma", "dia p", "--close", "--kind", "largest")
        assert code == OK and "FILTRATION THEOREM PASS" in out

    def test_filtrate_not_closed(self, chain_file):
        code, out, _ = call("filtrate", "--model", chain_file, "--sigma", "dia p")
        assert code == REFUTED and out.startswith("NOT CLOSED")

    def test_k5_fmp(self, tmp_path):
        path = tmp_path / "e.json"
        path.write_text(json.dumps({"worlds": ["a", "b"], "rel": [["a", "b"], ["b", "b"]], "val": {"p": ["b"]}}))
        code, out, _ = call("k5-fmp", "--model", str(path), "--formula", "dia p -> p")
        assert code == OK
        assert "FAIL" not in out

    def test_k5_fmp_rejects_non_euclidean(self, chain_file):
        code, out, _ = call("k5-fmp", "--model", chain_file, "--formula", "dia p -> p")
        assert code == REFUTED and "not Euclidean" in out


class TestCanonical:
    def test_diamond_variant(self):
        code, out, _ = call("kl-canonical", "--formula", "dia p", "--truth-lemma")
        assert code == OK and "TRUTH LEMMA PASS" in out

    def test_box_variant_fails(self):
        code, out, _ = call("kl-canonical", "--formula", "dia p", "--variant", "box", "--truth-lemma")
        assert code == REFUTED and "(4 violations)" in out


class TestProofCommands:
    def test_check_bundled(self):
        code, out, _ = call("proof", "check", "re.prf")
        assert code == OK and out.startswith("OK (kb,")

    def test_check_rejected(self):
        code, out, _ = call("proof", "check", "kb_premise_witness.prf")
        assert code == REFUTED and out.startswith("REJECTED")

    def test_check_missing(self):
        code, _, _ = call("proof", "check", "no_such_file.prf")
        assert code == USAGE

    def test_check_malformed(self, tmp_path):
        path = tmp_path / "bad.prf"
        path.write_text("system kb\n1. p [frobnicate]\n")
        code, _, _ = call("proof", "check", str(path))
        assert code == USAGE

    @pytest.mark.parametrize("target", ["kr", "kb", "kd"])
    def test_transform(self, tmp_path, target):
        code, out, _ = call("proof", "transform", "identity.prf", "--to", target)
        assert code == OK
        path = tmp_path / "t.prf"
        path.write_text(out)
        d = load_proof(path)
        assert d.system.value == target

    def test_deduce(self, tmp_path):
        code, out, _ = call("proof", "deduce", "kb_modus-ponens.prf", "--discharge", "p")
        assert code == OK
        path = tmp_path / "d.prf"
        path.write_text(out)
        assert run(["proof", "check", str(path)], io.StringIO(), io.StringIO()) == OK


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_demo(name):
    code, out, _ = call("demo", name)
    assert code == OK
    assert "FAILED" not in out


@pytest.mark.parametrize(
    "argv",
    [
        ["sub", "box (p -> dia q)"],
        ["valid", "dia dia p -> dia p", "--max-worlds", "2"],
        ["kl-canonical", "--formula", "dia ~dia p", "--truth-lemma"],
        ["demo", "canonical"],
    ],
)
def test_output_is_deterministic(argv):
    first = call(*argv)
    assert call(*argv) == first


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "modalwb.cli", "parse", "dia p"], capture_output=True, text=True, check=False
    )
    assert res.returncode == OK and "core:" in res.stdout
