import csv
import io
import json
import math

import numpy as np
import pytest
from scipy import special

from levyleblond import __version__
from levyleblond.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from levyleblond.fracops import frac_laplacian_pow
from levyleblond.io import read_llfd, write_llfd
from levyleblond.lattice import LatticeField, LatticeSpec, dirac_h

from conftest import random_field


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def last_json(out):
    return json.loads(out.strip().splitlines()[-1])


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_solve_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code, text = run(capsys, "solve", "--N", 8, "--steps", 6, "--dt", 0.1, "--alpha", 0.5, "--theta", 0.3, "--out", out)
    assert code == EXIT_OK and last_json(text)["frames"] == 6
    phi0, phi5 = read_llfd(out / "phi_00000.llfd"), read_llfd(out / "phi_00005.llfd")
    # the delta datum has unit mass, which the evolution keeps
    assert phi0.total()[0] == pytest.approx(1.0)
    assert phi5.total()[0] == pytest.approx(1.0, abs=1e-12)
    assert (out / "psi_00005.llfd").exists()
    rows = list(csv.reader(io.StringIO((out / "mass.csv").read_text())))
    assert rows[0] == ["t", "re_0", "im_0"] and len(rows) == 7
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "solve" and man["config"]["frac"]["alpha"] == 0.5


def test_solve_formats_and_no_psi(tmp_path, capsys):
    out = tmp_path / "run"
    code, _ = run(capsys, "solve", "--N", 8, "--steps", 5, "--no-psi", "--formats", "llfd", "--out", out)
    assert code == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == [f"phi_{i:05d}.llfd" for i in range(5)]


def test_theta_violation_is_a_validation_error(tmp_path, capsys):
    code, text = run(capsys, "solve", "--alpha", 0.5, "--theta", 1.0, "--out", tmp_path)
    assert code == EXIT_VALIDATION
    body = last_json(text)
    assert body["error"] == "validation" and body["constraint"] == "theta_bound"


def test_config_file_and_schema(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": {"N": 8}, "time": {"steps": 5}, "output": {"formats": ["csv"]}}))
    code, _ = run(capsys, "solve", "--config", cfg, "--out", tmp_path / "a")
    assert code == EXIT_OK
    assert len((tmp_path / "a" / "mass.csv").read_text().splitlines()) == 6
    cfg.write_text(json.dumps({"lattice": {"n": 7}}))
    code, text = run(capsys, "solve", "--config", cfg)
    assert code == EXIT_VALIDATION and last_json(text)["constraint"] == "schema"
    cfg.write_text("{not json")
    code, text = run(capsys, "solve", "--config", cfg)
    assert code == EXIT_VALIDATION and last_json(text)["constraint"] == "config_file"


def test_verify_suite(tmp_path, capsys):
    code, text = run(capsys, "verify", "--suite", "algebra", "--write", "--out", tmp_path)
    assert code == EXIT_OK and "PASS" in text
    body = json.loads((tmp_path / "verify_algebra.json").read_text())
    assert body["passed"] and body["reports"]
    code, text = run(capsys, "verify", "--suite", "spectral", "--quiet")
    assert code == EXIT_OK and text == ""


def test_verify_failure_exit_code(capsys):
    cfg_tol = ["--suite", "algebra", "--quiet"]
    # an impossible tolerance forces a failing report
    import levyleblond.cli as cli

    saved = cli.DEFAULT_CONFIG["tolerances"]["algebra"]
    cli.DEFAULT_CONFIG["tolerances"]["algebra"] = -1.0
    try:
        code, _ = run(capsys, "verify", *cfg_tol)
    finally:
        cli.DEFAULT_CONFIG["tolerances"]["algebra"] = saved
    assert code == EXIT_NUMERICAL


def test_heat_kernel_table(tmp_path, capsys):
    target = tmp_path / "k.csv"
    code, text = run(capsys, "kernel", "--N", 8, "--t", 0.5, 2.0, "-o", target)
    assert code == EXIT_OK
    info = last_json(text)
    assert set(info["masses"]) == {"0.0", "0.5", "2.0"} and info["max_mass_error"] < 1e-13
    rows = list(csv.reader(io.StringIO(target.read_text())))
    assert rows[0] == ["t", "x_1", "re", "im"]
    at_zero = {int(r[1]): float(r[2]) for r in rows[1:] if float(r[0]) == 0.0}
    assert at_zero[0] == 1.0 and all(v == 0.0 for k, v in at_zero.items() if k)
    # z = 2t/h^2 = 1; the 8-site ring adds images e^{-1} I_{8p}(1)
    i0 = sum(math.exp(-1.0) * special.iv(8 * p, 1.0) for p in range(-3, 4))
    assert any(float(r[0]) == 0.5 and r[1] == "0" and float(r[2]) == pytest.approx(i0, rel=1e-12) for r in rows[1:])


def test_kernel_guards(capsys):
    code, text = run(capsys, "kernel", "--alpha", 0.5)
    assert code == EXIT_VALIDATION and last_json(text)["constraint"] == "alpha_range"
    code, text = run(capsys, "kernel", "--kind", "delta", "--sigma", 0.5)
    assert code == EXIT_VALIDATION and last_json(text)["constraint"] == "sigma_range"
    code, text = run(capsys, "kernel", "--kind", "delta", "--N", 4, "--sigma", 0.25)
    assert code == EXIT_OK and text.splitlines()[0] == "x_1,re,im" and len(text.splitlines()) == 5


def test_fracpow_and_project(tmp_path, capsys, rng):
    s = LatticeSpec(1, 16, 1.0)
    f = random_field(s, rng, blades=[0, 2], mean_zero=True)
    src = write_llfd(tmp_path / "f.llfd", f)
    for method in ("spectral", "bochner"):
        code, _ = run(capsys, "fracpow", src, tmp_path / f"g_{method}.llfd", "--sigma", 0.25, "--method", method)
        assert code == EXIT_OK
        g = read_llfd(tmp_path / f"g_{method}.llfd")
        assert g.distance(frac_laplacian_pow(0.25, f)) < 1e-8 * g.max_norm()
    code, _ = run(capsys, "project", src, tmp_path / "p.llfd")
    assert code == EXIT_OK
    assert dirac_h(read_llfd(tmp_path / "p.llfd")).max_norm() < 1e-12
    code, _ = run(capsys, "project", src, tmp_path / "t.llfd", "--op", "teodorescu")
    assert code == EXIT_OK
    assert dirac_h(read_llfd(tmp_path / "t.llfd")).distance(f) < 1e-12


def test_project_rejects_mean_for_teodorescu(tmp_path, capsys):
    src = write_llfd(tmp_path / "c.llfd", LatticeField.constant(LatticeSpec(1, 8, 1.0), 1.0))
    code, text = run(capsys, "project", src, tmp_path / "o.llfd", "--op", "teodorescu")
    assert code == EXIT_VALIDATION and last_json(text)["constraint"] == "ZeroModeError"


def test_io_errors(tmp_path, capsys):
    bad = tmp_path / "bad.llfd"
    bad.write_bytes(b"JUNKJUNKJUNK")
    code, text = run(capsys, "fracpow", bad, tmp_path / "o.llfd", "--sigma", 0.5)
    assert code == EXIT_VALIDATION and last_json(text)["constraint"] == "io"
    code, text = run(capsys, "fracpow", tmp_path / "missing.llfd", tmp_path / "o.llfd", "--sigma", 0.5)
    assert code == EXIT_VALIDATION


def test_spectrum(tmp_path, capsys):
    code, text = run(capsys, "spectrum", "--n", 2, "--N", 4, "--h", 0.5)
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0][:5] == ["k_1", "k_2", "xi_1", "xi_2", "d2"]
    assert len(rows) == 17
    d2 = np.array([float(r[4]) for r in rows[1:]])
    assert [r[:2] for r in rows[1:5]] == [["0", "0"], ["0", "1"], ["0", "2"], ["0", "-1"]]
    assert d2[0] == 0.0 and d2.max() == pytest.approx(2 * 4 / 0.25)
