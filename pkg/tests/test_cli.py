import json
import subprocess
import sys

import pytest

from heckeconv import builder
from heckeconv.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def round_trips(text):
    return json.dumps(json.loads(text), sort_keys=True, indent=2) == text.strip()


class TestVerify:
    def test_level_23(self, capsys):
        code, out, _ = run(capsys, "verify", "--level", "23", "--json")
        assert code == 0 and round_trips(out)
        res = json.loads(out)["results"][0]
        assert res["assertions"] == [str(m) for m in builder.generator_matrices(23)]

    def test_all_levels_text(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == 0
        assert out.count("VERIFIED") == len(builder.LEVELS)

    def test_unsupported(self, capsys):
        code, _, err = run(capsys, "verify", "--level", "13")
        assert code == 3 and "unsupported level" in err

    def test_broken_script(self, capsys, tmp_path):
        text = builder.builtin_script_text(11)
        broken = text.replace("cert= T3*(1*[3,0;0,1]) as S3_1", "cert= T3*(2*[3,0;0,1]) as S3_1")
        assert broken != text
        path = tmp_path / "broken.ccv"
        path.write_text(broken)
        code, _, err = run(capsys, "verify", "--script", str(path))
        assert code == 2
        lineno = broken.splitlines().index(
            next(l for l in broken.splitlines() if "as S3_1" in l)) + 1
        assert f"line {lineno}" in err and "residual" in err

    def test_script_syntax_error(self, capsys, tmp_path):
        path = tmp_path / "bad.ccv"
        path.write_text("session N=5\nhyp Q\n")
        code, _, err = run(capsys, "verify", "--script", str(path))
        assert code == 3 and "line 2" in err

    def test_user_script(self, capsys, tmp_path):
        path = tmp_path / "t2.ccv"
        code, _, _ = run(capsys, "script", "theorem2", "--n", "2", "--level", "5", "-o", str(path))
        assert code == 0
        code, out, _ = run(capsys, "verify", "--script", str(path))
        assert code == 0 and "VERIFIED" in out

    def test_trace(self, capsys):
        code, out, _ = run(capsys, "verify", "--level", "5", "--trace", "--json")
        assert code == 0 and json.loads(out)["results"][0]["trace"]


class TestCertify:
    def test_level_14(self, capsys):
        code, out, _ = run(capsys, "certify-generators", "--level", "14", "--json")
        assert code == 0 and round_trips(out)
        assert json.loads(out)["results"][0]["index"] == 24

    def test_drop(self, capsys):
        code, out, _ = run(capsys, "certify-generators", "--level", "11", "--drop", "M3")
        assert code == 1 and "NotGenerating" in out

    def test_level_9(self, capsys):
        code, out, _ = run(capsys, "certify-generators", "--level", "9", "--json")
        assert code == 0 and json.loads(out)["results"][0]["index"] == 12

    def test_not_member(self, capsys):
        code, _, _ = run(capsys, "certify-generators", "--level", "11", "--gens", "P", "[1,0;1,1]")
        assert code == 1

    def test_bad_drop(self, capsys):
        code, _, _ = run(capsys, "certify-generators", "--level", "11", "--drop", "M7")
        assert code == 3

    def test_coset_cap_from_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("# tiny cap\ncoset_cap = 5\n")
        code, out, _ = run(capsys, "certify-generators", "--level", "11", "--config", str(cfg))
        assert code == 1 and "coset limit" in out


class TestNumeric:
    def test_invariance(self, capsys):
        code, out, _ = run(capsys, "numeric", "invariance", "--form", "eta:1^2,11^2",
                           "--level", "11", "--json")
        assert code == 0 and round_trips(out)
        assert all(r["max_residual"] < 1e-8 for r in json.loads(out)["results"])

    def test_invariance_seed(self, capsys):
        code, out, _ = run(capsys, "numeric", "invariance", "--form", "eta:1^2,11^2",
                           "--level", "11", "--matrix", "M(3)", "--seed", "7", "--json")
        assert code == 0 and len(json.loads(out)["results"][0]["points"]) > 5

    def test_cusp_counterexample(self, capsys):
        code, out, _ = run(capsys, "numeric", "cusp", "--form", "eis-chi3", "--level", "9",
                           "--cusp", "1/3", "--json")
        assert code == 1
        assert json.loads(out)["results"][0]["modulus"] > 0.01

    def test_cusp_f11(self, capsys):
        code, out, _ = run(capsys, "numeric", "cusp", "--form", "eta:1^2,11^2")
        assert code == 0 and out.count("vanishes") == 2

    def test_classify(self, capsys):
        code, out, _ = run(capsys, "numeric", "classify", "--matrix", "[1,-2/3;11/2,-8/3]")
        assert code == 0 and out.strip() == "elliptic, infinite order, tr^2/det = 25/9"

    def test_hecke(self, capsys):
        code, out, _ = run(capsys, "numeric", "hecke", "--form", "delta", "--p", "2", "--json")
        assert code == 0
        assert abs(json.loads(out)["results"][0]["estimate"][0] + 0.75) < 1e-8

    def test_expand_export(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        code, out, _ = run(capsys, "numeric", "expand", "--form", "eta:1^2,11^2", "--terms", "50",
                           "--show", "5", "--export", str(path))
        assert code == 0 and "a_2 = -2" in out
        assert json.loads(path.read_text())["K"] == 50

    def test_euler_form(self, capsys, tmp_path):
        from heckeconv.analytic import LocalFactorSpec, f11, primes_upto
        f = f11(100)
        spec = LocalFactorSpec(11, 2, {p: f[p] for p in primes_upto(100) if p != 11})
        path = tmp_path / "ap.json"
        path.write_text(spec.to_json())
        code, out, _ = run(capsys, "numeric", "expand", "--form", f"euler:{path}", "--terms", "100",
                           "--show", "100", "--json")
        assert code == 0
        assert json.loads(out)["coefficients"] == [str(c) for c in f.coeffs[1:]]

    def test_missing_prime(self, capsys, tmp_path):
        path = tmp_path / "ap.json"
        path.write_text('{"level": 11, "weight": 2, "ap": {"2": "-2"}}')
        code, _, _ = run(capsys, "numeric", "expand", "--form", f"euler:{path}", "--terms", "10")
        assert code == 3

    def test_precision(self, capsys):
        code, _, err = run(capsys, "numeric", "invariance", "--form", "eta:1^2,11^2",
                           "--terms", "20", "--matrix", "M(3)", "--level", "11")
        assert code == 4 and "tail bound" in err

    def test_bad_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("colour = red\n")
        code, _, _ = run(capsys, "numeric", "hecke", "--form", "delta", "--config", str(cfg))
        assert code == 3

    def test_config_sets_terms(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("K = 30\n")
        code, out, _ = run(capsys, "numeric", "expand", "--form", "delta", "--config", str(cfg),
                           "--json")
        assert code == 0 and json.loads(out)["K"] == 30


def test_script_kinds(capsys):
    for argv in (["script", "level", "--level", "7"],
                 ["script", "corollary2", "--m", "3", "--level", "11"],
                 ["script", "theorem3", "--level", "14", "--r", "7"]):
        code, out, _ = run(capsys, *argv)
        assert code == 0 and out.startswith("#")
    code, _, _ = run(capsys, "script", "theorem3", "--level", "9")
    assert code == 1


def test_usage(capsys):
    assert run(capsys, "frobnicate")[0] == 3
    assert run(capsys, "--help")[0] == 0


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "heckeconv", "numeric", "classify",
                          "--matrix", "[11,17/4;-30,-23/2]"], capture_output=True, text=True)
    assert out.returncode == 0 and "1/4" in out.stdout
