import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from summingnorms.cli import exponent, main
from summingnorms.instances import InstanceError, load_instance, load_schema, parse_instance
from summingnorms.spaces import INF

SAMPLE = Path(__file__).resolve().parent.parent / "docs" / "samples" / "two_vectors.json"


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argument errors leave through argparse
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("report"))
    return doc


class TestExponentParsing:
    @pytest.mark.parametrize("text,value", [("2", 2.0), ("4/3", 4.0 / 3.0), ("1.5", 1.5)])
    def test_finite(self, text, value):
        assert exponent(text) == pytest.approx(value)

    @pytest.mark.parametrize("text", ["inf", "INF", "infinity"])
    def test_infinite(self, text):
        assert exponent(text) is INF

    def test_garbage(self, capsys):
        code, _, err = run(capsys, "norm", str(SAMPLE), "--kind", "strong", "--q", "two")
        assert code == 2 and "error" in err


class TestNorm:
    def test_sample_strong_norm(self, capsys):
        doc = report(capsys, "norm", str(SAMPLE), "--kind", "strong", "--q", "2")
        item = doc["items"][0]
        assert item["value"] == pytest.approx(math.sqrt(125), rel=1e-15)
        assert item["kind"] == "exact"

    def test_sample_weak_norm(self, capsys):
        # both vectors are parallel, so the weak l_2 norm is sqrt(125) as well
        doc = report(capsys, "norm", str(SAMPLE), "--kind", "weak", "--q", "2")
        assert doc["items"][0]["value"] == pytest.approx(math.sqrt(125), rel=1e-12)

    def test_mixed_bracket(self, capsys):
        up = report(capsys, "norm", str(SAMPLE), "--kind", "mixed", "--s", "4", "--q", "2")["items"][0]["value"]
        low = report(capsys, "norm", str(SAMPLE), "--kind", "mixed-dual", "--s", "4", "--q", "2")["items"][0]["value"]
        assert low <= up * (1 + 1e-9)

    def test_report_keys(self, capsys):
        doc = report(capsys, "norm", str(SAMPLE), "--kind", "strong", "--q", "1")
        assert list(doc) == ["version", "tool", "tool_version", "command", "seed", "budget", "wall_time", "items"]

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        code, out, _ = run(capsys, "norm", str(SAMPLE), "--kind", "strong", "--q", "2", "--out", str(path))
        assert code == 0 and out == ""
        assert json.loads(path.read_text())["items"][0]["target"] == "X"

    def test_summing_norm_of_generated_tensor(self, capsys, tmp_path):
        path = tmp_path / "t.json"
        assert run(capsys, "gen", "identity-tensor", "--n", "2", "--N", "2", "--out", str(path))[0] == 0
        doc = report(capsys, "norm", str(path), "--kind", "summing", "--summing-kind", "multiple",
                     "--p", "4/3", "--q", "1", "--budget-restarts", "2", "--budget-iters", "20", "--m-max", "2")
        assert doc["items"][0]["kind"] == "lower-bound"
        assert doc["items"][0]["value"] >= 2 ** 0.75 / 2 - 1e-9


class TestExitCodes:
    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "norm", str(tmp_path / "nope.json"), "--kind", "strong", "--q", "2")
        assert code == 2 and err.startswith("error:")

    def test_unknown_kind(self, capsys):
        assert run(capsys, "norm", str(SAMPLE), "--kind", "fancy")[0] == 2

    def test_unknown_law(self, capsys):
        assert run(capsys, "verify", "fermat")[0] == 2

    def test_bad_dimensions(self, capsys):
        assert run(capsys, "gen", "sign-tensor", "--N", "0")[0] == 2

    def test_q_above_s(self, capsys):
        code, _, err = run(capsys, "norm", str(SAMPLE), "--kind", "mixed", "--s", "1", "--q", "2")
        assert code == 3
        assert err.strip() == "error: inadmissible exponents: q > s"

    def test_inadmissible_summing(self, capsys, tmp_path):
        path = tmp_path / "t.json"
        run(capsys, "gen", "gaussian-tensor", "--n", "2", "--N", "2", "--out", str(path))
        code, _, err = run(capsys, "norm", str(path), "--kind", "summing", "--summing-kind", "multiple",
                           "--p", "1", "--q", "2")
        assert code == 3
        assert "1/p > 1/q_i" in err

    def test_malformed_file_reports_line(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        text = SAMPLE.read_text().replace('"exponent": 2', '"exponent": 0.5')
        path.write_text(text)
        line = 1 + text[: text.index('"exponent": 0.5')].count("\n")
        code, _, err = run(capsys, "norm", str(path), "--kind", "strong", "--q", "2")
        assert code == 2
        assert f"{path}:{line}:" in err

    def test_invalid_json_line(self):
        with pytest.raises(InstanceError) as info:
            parse_instance('{\n "version": "summingnorms/instance@1",\n "spaces": {,}\n}', "x.json")
        assert info.value.line == 3
        assert str(info.value).startswith("x.json:3:")

    def test_ragged_data(self):
        doc = json.loads(SAMPLE.read_text())
        doc["families"][0]["data"] = [[3, 4], [6]]
        with pytest.raises(InstanceError):
            parse_instance(json.dumps(doc, indent=1))


class TestVerify:
    def test_littlewood(self, capsys):
        code, out, err = run(capsys, "verify", "littlewood43", "--N", "3", "--count", "10", "--seed", "7")
        doc = json.loads(out)
        assert code == 0
        assert doc["summary"]["pass"] == doc["summary"]["count"] == 12
        assert "littlewood43: 12 pass, 0 fail, 0 inconclusive" in err
        jsonschema.validate(doc, load_schema("report"))

    def test_triviality_exponent(self, capsys):
        code, out, _ = run(capsys, "verify", "triviality", "--count", "2", "--p", "1", "--q", "4", "--r", "4")
        assert code == 0
        assert json.loads(out)["summary"]["divergence_exponents"] == pytest.approx([0.5, 0.5], rel=1e-9)

    def test_bh_reports_probe(self, capsys):
        code, out, _ = run(capsys, "verify", "bh", "--count", "2", "--n", "2", "--N", "3")
        summary = json.loads(out)["summary"]
        assert code == 0 and "exponent_probe" in summary

    def test_report_is_deterministic(self, capsys):
        argv = ("verify", "maurey", "--count", "3", "--seed", "11")
        a, b = report(capsys, *argv), report(capsys, *argv)
        a.pop("wall_time"), b.pop("wall_time")
        assert a == b


class TestGen:
    def test_sign_tensor(self, capsys):
        code, out, _ = run(capsys, "gen", "sign-tensor", "--n", "2", "--N", "4", "--seed", "1")
        assert code == 0
        inst = parse_instance(out)
        coeffs = inst.tensors["T"].coeffs
        assert coeffs.size == 16 and set(np.unique(coeffs)) == {-1.0, 1.0}

    def test_fourier_rows(self, capsys):
        _, out, _ = run(capsys, "gen", "fourier-tensor", "--n", "2", "--N", "4")
        A = parse_instance(out).tensors["T"].coeffs[..., 0]
        assert np.allclose(np.linalg.norm(A, axis=1), 2.0)

    @pytest.mark.parametrize("kind", ["gaussian-tensor", "basis-family", "gaussian-family"])
    def test_deterministic_and_valid(self, capsys, kind):
        a = run(capsys, "gen", kind, "--seed", "5", "--N", "3", "--m", "2")[1]
        b = run(capsys, "gen", kind, "--seed", "5", "--N", "3", "--m", "2")[1]
        assert a == b
        jsonschema.validate(json.loads(a), load_schema("instance"))
        assert a != run(capsys, "gen", kind, "--seed", "6", "--N", "3", "--m", "2")[1] or kind == "basis-family"

    def test_round_trip_through_file(self, capsys, tmp_path):
        path = tmp_path / "g.json"
        run(capsys, "gen", "gaussian-family", "--N", "3", "--m", "4", "--exponent", "3", "--out", str(path))
        fam = load_instance(path).families["X"]
        assert fam.flat.shape == (4, 3) and fam.space.exponent == 3.0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "summingnorms", "norm", str(SAMPLE), "--kind", "strong", "--q", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["items"][0]["value"] == pytest.approx(math.sqrt(125))
