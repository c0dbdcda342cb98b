import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from schwarzlift.cli import EXIT_COLLISION, EXIT_FAILURE, EXIT_PASS, EXIT_VIOLATION, main
from schwarzlift.config import RunConfig
from schwarzlift.errors import ParamError
from schwarzlift.lift import read_ply


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_obj_counts(path):
    lines = open(path).read().splitlines()
    return (sum(ln.startswith("v ") for ln in lines), sum(ln.startswith("f ") for ln in lines))


def report(text):
    return json.loads(text.strip().splitlines()[-1])


# ---------------------------------------------------------------- config

def test_config_round_trip_is_byte_identical(tmp_path):
    cfg = RunConfig(family="hille", c=0.5, eps=0.07, p="0.5*nehari2", angles=(0.0, 1.25),
                    h="z + 0.1*z^2", nr=17, tol=1e-7)
    text = cfg.to_text()
    again = RunConfig.from_text(text)
    assert again == cfg
    assert again.to_text() == text
    path = tmp_path / "run.ini"
    cfg.save(path)
    assert RunConfig.load(path) == cfg
    assert path.read_bytes() == text.encode()


def test_default_config_round_trip():
    assert RunConfig.from_text(RunConfig().to_text()) == RunConfig()


def test_partial_config_keeps_defaults():
    cfg = RunConfig.from_text("[run]\nt = 1.2\n")
    assert cfg.t == 1.2 and cfg.c == RunConfig().c


@pytest.mark.parametrize("text", [
    "[run]\nbogus = 1\n",
    "[run]\nnr = many\n",
    "[run]\nrmax = 0.9x\n",
    "[other]\nnr = 3\n",
    "no section header\n",
])
def test_config_rejects_bad_input(text):
    with pytest.raises(ParamError):
        RunConfig.from_text(text)


# ---------------------------------------------------------------- extremal

def _profile(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["x"]) for r in rows]), np.array([float(r["phi"]) for r in rows])


def test_extremal_nehari2_matches_atanh(capsys, tmp_path):
    out = tmp_path / "p.csv"
    code, text, _ = run(capsys, "extremal", "--p", "nehari2", "--rmax", "0.99", "--out", str(out))
    assert code == EXIT_PASS
    rep = report(text)
    assert rep["lambda"] == pytest.approx(1.0)
    x, phi = _profile(out)
    assert np.max(np.abs(phi - np.arctanh(x))) <= 1e-8


def test_extremal_pi2over4_matches_tan(capsys, tmp_path):
    out = tmp_path / "p.csv"
    code, text, _ = run(capsys, "extremal", "--p", "pi2over4", "--rmax", "0.99", "--out", str(out))
    assert code == EXIT_PASS
    x, phi = _profile(out)
    assert np.max(np.abs(phi - 2 / np.pi * np.tan(np.pi * x / 2))) <= 1e-8 * np.max(np.abs(phi))
    assert report(text)["lambda"] == pytest.approx(0.0, abs=1e-9)


def test_extremal_expression_weight(capsys):
    code, text, _ = run(capsys, "extremal", "--p", "1/(1-x^2)", "--rmax", "0.99")
    assert code == EXIT_PASS
    assert report(text)["lambda"] == pytest.approx(0.0, abs=1e-9)


def test_extremal_disconjugacy_failure_exits_4(capsys):
    code, _, err = run(capsys, "extremal", "--p", "4*pi2over4")
    assert code == EXIT_FAILURE
    assert "DisconjugacyFailure" in err


# ---------------------------------------------------------------- check

def test_check_example_passes(capsys, tmp_path):
    js, cs = tmp_path / "r.json", tmp_path / "r.csv"
    code, text, _ = run(capsys, "check", "--json-out", str(js), "--csv-out", str(cs))
    assert code == EXIT_PASS
    rep = report(text)
    assert rep["pass"] and rep["min_margin"] >= -1e-9
    assert json.loads(js.read_text()) == rep
    assert cs.read_text().count("\n") == 60 * 60 + 1


def test_check_violation_exits_2(capsys):
    code, text, _ = run(capsys, "check", "--t", "1.2")
    assert code == EXIT_VIOLATION
    assert report(text)["min_margin"] < 0


def test_check_reads_config_and_flags_override(capsys, tmp_path):
    path = tmp_path / "run.ini"
    RunConfig(t=1.2, nr=10, ntheta=12).save(path)
    code, text, _ = run(capsys, "check", "--config", str(path))
    assert code == EXIT_VIOLATION
    assert report(text)["grid"] == {"nr": 10, "ntheta": 12, "rmax": 0.95}
    code, _, _ = run(capsys, "check", "--config", str(path), "--t", "1.0")
    assert code == EXIT_PASS


def test_malformed_expression_exits_4_with_caret(capsys):
    code, text, err = run(capsys, "check", "--family", "custom", "--h", "exp(z", "--g", "z", "--q", "1")
    assert code == EXIT_FAILURE
    assert text == ""
    lines = err.splitlines()
    assert "ParseError" in lines[0] and "column 5" in lines[0]
    assert lines[-1] == "       ^"


def test_custom_map_check(capsys):
    # h = z, g = z^3/3, q = z: a rescaled Enneper-type patch
    code, text, _ = run(capsys, "check", "--family", "custom", "--h", "z", "--g", "z^3/3",
                        "--q", "z", "--q-inv", "1/z", "--nr", "8", "--ntheta", "8", "--rmax", "0.5")
    assert code in (EXIT_PASS, EXIT_VIOLATION)
    assert report(text)["check"] == "criterion"


def test_unknown_option_exits_4(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check", "--nonsense", "1"])
    assert info.value.code == EXIT_FAILURE


def test_bad_mesh_suffix_exits_4(capsys, tmp_path):
    code, _, err = run(capsys, "mesh", "--mesh-out", str(tmp_path / "x.stl"), "--nr", "4", "--ntheta", "4")
    assert code == EXIT_FAILURE
    assert ".obj or .ply" in err


# ---------------------------------------------------------------- scan, mesh, convexity

def test_scan_collision_exits_3(capsys):
    code, text, _ = run(capsys, "scan", "--t", "1.5", "--scan-n", "8000", "--scan-rmax", "0.99")
    assert code == EXIT_COLLISION
    rep = report(text)
    assert not rep["pass"]


def test_scan_example_passes(capsys):
    code, text, _ = run(capsys, "scan", "--scan-n", "8000")
    assert code == EXIT_PASS
    assert report(text)["pass"]


@pytest.mark.parametrize("suffix", [".obj", ".ply"])
def test_mesh_writes_files(capsys, tmp_path, suffix):
    path = tmp_path / f"lift{suffix}"
    code, text, _ = run(capsys, "mesh", "--mesh-out", str(path), "--nr", "6", "--ntheta", "9")
    assert code == EXIT_PASS
    rep = report(text)
    if suffix == ".ply":
        mesh = read_ply(path)
        counts = (len(mesh.vertices), len(mesh.faces))
    else:
        counts = read_obj_counts(path)
    assert counts == (rep["vertices"], rep["faces"])


def test_convexity_runs(capsys):
    code, text, _ = run(capsys, "convexity", "--angles", "0,1.5707963267948966",
                        "--convexity-n", "60", "--profile-n", "801", "--nr", "10", "--ntheta", "10")
    assert code == EXIT_PASS
    rep = report(text)
    assert rep["pass"]
    checks = [r["check"] for r in rep["reports"]]
    assert checks.count("omega_convexity_normalized") == 2
    assert checks[-1] == "lemma2"
    for r in rep["reports"]:
        if r["check"] == "omega_convexity_normalized":
            assert r["tau_slope"] == pytest.approx(-1.0, abs=1e-6)
            assert r["omega_slope"] > 0


def test_examples_lists_catalogue(capsys):
    code, text, _ = run(capsys, "examples")
    assert code == EXIT_PASS
    rep = report(text)
    assert {f["family"] for f in rep["families"]} >= {"catenoid_exp", "strip_catenoid", "hille"}
    keys = {w["key"]: w for w in rep["weights"]}
    assert {"nehari2", "pi2over4"} <= set(keys)
    assert any(w["flagged"] for w in rep["weights"])


def test_help_shows_units_and_defaults():
    proc = subprocess.run([sys.executable, "-m", "schwarzlift.cli", "check", "--help"],
                          capture_output=True, text=True, check=True)
    text = " ".join(proc.stdout.split())
    assert "fraction of the unit disk" in text
    assert "(default: 0.95)" in text
    assert "(default: 60)" in text
    assert "dimensionless" in text


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "schwarzlift.cli", "examples"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["weights"]


def test_identical_configs_give_identical_reports(capsys, tmp_path):
    cfg = RunConfig(nr=15, ntheta=20, t=1.1)
    paths = []
    for name in ("a", "b"):
        ini = tmp_path / f"{name}.ini"
        out = tmp_path / f"{name}.json"
        cfg.replace(json_out=str(out)).save(ini)
        run(capsys, "check", "--config", str(ini))
        paths.append(out)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_threads_do_not_change_scan(capsys):
    outs = []
    for n in ("1", "3"):
        code, text, _ = run(capsys, "--threads", n, "scan", "--scan-n", "4000")
        outs.append(text)
    assert outs[0] == outs[1]
