import json
import subprocess
import sys

import pytest

from nilsampler.cli import clean, main


def run(capsys, *argv):
    code = main(["--indent", "0", *argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def strip_timing(rep):
    rep = dict(rep)
    rep.pop("timing", None)
    return rep


def test_verify_exit_codes(capsys, tmp_path):
    code, rep = run(capsys, "verify", "heisenberg")
    assert code == 0 and rep["results"]["passed"] and rep["exit_code"] == 0
    code, rep = run(capsys, "verify", "counterexample_5dim")
    assert code == 1
    assert any("cardinality 2 != 2m = 4" in d for d in rep["results"]["condition"]["diagnostics"])
    bad = tmp_path / "dup.json"
    bad.write_text(json.dumps({"name": "d", "dim": 3, "p_dim": 2, "brackets": [
        {"i": 2, "j": 3, "coeffs": {"1": 1}}, {"i": 2, "j": 3, "coeffs": {"1": 1}}]}))
    code, rep = run(capsys, "verify", str(bad))
    assert code == 2 and rep["error"]["kind"] == "input" and "duplicate" in rep["error"]["message"]


def test_spec_file_digest(capsys, tmp_path):
    f = tmp_path / "h.json"
    f.write_text(json.dumps({"name": "h", "dim": 3, "p_dim": 2, "brackets": [{"i": 2, "j": 3, "coeffs": {"1": -1}}]}))
    code, rep = run(capsys, "delta", str(f))
    assert code == 0 and rep["input_digest"].startswith("sha256:") and rep["results"]["delta"] == "1/4"


def test_argparse_error_is_input_error(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


@pytest.mark.parametrize("key, delta", [("heisenberg", "1/4"), ("dim4_step3", "1/10"), ("stepk_m2", "1/10")])
def test_delta(capsys, key, delta):
    code, rep = run(capsys, "delta", key)
    assert code == 0 and rep["results"]["delta"] == delta


def test_delta_refuses_failed_condition(capsys):
    code, rep = run(capsys, "delta", "counterexample_5dim")
    assert code == 1 and rep["error"]["kind"] == "rejected"


def test_orbit_commands(capsys):
    code, rep = run(capsys, "orbit", "jump-set", "heisenberg")
    assert code == 0 and rep["results"]["jump_set"] == [2, 3]
    code, rep = run(capsys, "orbit", "beta", "remark_5dim_example", "--at", "λ=(1,0,0) t=(0,0)")
    assert code == 0 and rep["results"]["beta"] == ["1", "0", "0"]
    code, rep = run(capsys, "orbit", "plancherel", "stepk_m3")
    assert code == 0 and rep["results"]["monomial"]["degree"] == 3 and rep["results"]["ratio_constant"]
    code, rep = run(capsys, "orbit", "beta", "heisenberg", "--at", "λ=(1,1,0) t=(0)")
    assert code == 2 and "jump index" in rep["error"]["message"]


def test_domain(capsys):
    code, rep = run(capsys, "domain", "heisenberg", "--box=-0.25,0.25", "--samples", "5000")
    assert code == 0 and rep["results"]["contained"]
    code, rep = run(capsys, "domain", "heisenberg", "--box=-1,1", "--samples", "5000")
    assert code == 1 and not rep["results"]["contained"]
    code, rep = run(capsys, "domain", "heisenberg", "--box=-1,1", "--tiling")
    assert code == 0 and rep["results"]["tiling"] and rep["results"]["mu_measure_exact"] == "1"
    code, rep = run(capsys, "domain", "heisenberg", "--box=-1,1;0,1")
    assert code == 2


def test_frames_small(capsys, tmp_path):
    res = ["--lambda-nodes", "64", "--t-nodes", "32", "--T", "2", "--kmax", "24"]
    code, rep = run(capsys, "frames", "intertwine", "heisenberg", "--gamma=A1", *res)
    assert code == 0 and rep["results"]["deviation"] < 1e-6 and "tolerance" in rep["results"]
    csv_path = tmp_path / "j.csv"
    code, rep = run(capsys, "frames", "isometry", "heisenberg", "--box=-0.25,0.25", "--csv", str(csv_path), *res)
    assert code == 0 and "tail_estimate" in rep["results"] and csv_path.exists()
    code, rep = run(capsys, "frames", "isometry", "heisenberg", "--box=-5/2,5/2", *res, "--samples", "5000")
    assert code == 1 and "--force" in rep["error"]["message"]
    code, rep = run(capsys, "frames", "isometry", "heisenberg", "--box=-5/2,5/2", "--force", *res,
                    "--samples", "5000")
    assert code == 0 and rep["results"]["label"] == "negative-control"


def test_frames_reconstruct_improves_with_kmax(capsys):
    errs = []
    for k in ("6", "12"):
        code, rep = run(capsys, "frames", "reconstruct", "heisenberg", "--kmax", k,
                        "--lambda-nodes", "64", "--t-nodes", "32", "--T", "2")
        assert code == 0
        errs.append(rep["results"]["rel_l2_error"])
    assert errs[1] < errs[0]


def test_examples(capsys):
    code, rep = run(capsys, "examples", "list")
    assert code == 0 and len(rep["results"]["corpus"]) >= 7
    code, rep = run(capsys, "examples", "run", "stepk_m4", "counterexample_5dim", "--no-frames")
    assert code == 0 and rep["results"]["all_ok"]
    checks = {c["check"]: c for c in rep["results"]["results"][0]["checks"]}
    assert checks["delta_positive_finite"]["ok"]
    code, rep = run(capsys, "examples", "run", "nosuch")
    assert code == 2


@pytest.mark.slow
def test_examples_run_all(capsys):
    code, rep = run(capsys, "examples", "run", "--all")
    assert code == 0 and rep["results"]["all_ok"]


def test_reports_deterministic(capsys):
    a = run(capsys, "domain", "heisenberg", "--box=-1,1", "--tiling", "--samples", "20000")[1]
    b = run(capsys, "domain", "heisenberg", "--box=-1,1", "--tiling", "--samples", "20000")[1]
    assert strip_timing(a) == strip_timing(b)
    assert a["parameters"]["seed"] == 0xC0FFEE


def test_float_formatting():
    from fractions import Fraction

    assert clean(0.1 + 0.2) == 0.3
    assert clean(Fraction(1, 3)) == "1/3"
    assert clean(float("nan")) == "nan"
    assert clean({"a": (1, 2.5)}) == {"a": [1, 2.5]}


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "nilsampler", "verify", "heisenberg"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["report_version"] == 1
