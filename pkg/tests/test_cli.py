import json
import math
import shutil
import subprocess
import sys

import pytest

from cgc.cli import (
    ConfigError,
    config_from_manifest,
    defaults_help,
    main,
    parse_config,
    parse_text,
    resolve_outdir,
)

MINIMAL_2D = "dim=2 R=1 alpha=1.5707963 t=0.5\n"
CAP_3D = "[scenario]\ndim=3 R=1 z0=0.8 t=0.25\n[solver]\nh=0.0375\n"


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(tmp_path, command, text, out="out", *extra):
    cfg = write(tmp_path, text)
    outdir = tmp_path / out
    code = main([command, "--config", cfg, "--out", str(outdir), *extra])
    manifest = json.loads((outdir / "manifest.json").read_text())
    return code, outdir, manifest


def test_minimal_config_gets_defaults():
    cfg = parse_text(MINIMAL_2D)
    assert cfg.scenario["t"] == 0.5 and cfg.solver["m"] == 720
    assert cfg.verify["t"] == 0.5 and math.isclose(cfg.verify["eps"], 0.025)
    assert math.isclose(cfg.solver["tol"], 5e-9) and cfg.verify["interior"] == "true"


def test_3d_defaults():
    cfg = parse_text("dim=3 R=1 z0=0.8 t=0.25")
    assert math.isclose(cfg.solver["h"], 0.6 / 32)


def test_curvature_above_bound_rejected():
    with pytest.raises(ConfigError, match="k = R"):
        parse_text("t=2 R=1 dim=3")


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("dim=2\nbogus=1\n", "line 2"),
        ("[nowhere]\n", "line 1"),
        ("t=0.5 t=0.4\n", "duplicate"),
        ("t=half\n", "expects float"),
        ("[solver\n", "malformed"),
        ("dim\n", "key=value"),
    ],
)
def test_parse_errors_carry_context(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_text(text)


@pytest.mark.parametrize(
    "text",
    [
        MINIMAL_2D + "[solver]\nm=8\n",
        MINIMAL_2D + "[solver]\nstencil_width=3\n",
        MINIMAL_2D + "[solver]\nomega=0\n",
        "dim=3 z0=0.8 t=0.25\n[solver]\nh=0.1\n",
        MINIMAL_2D + "[verify]\ninterior=maybe\n",
    ],
)
def test_semantic_errors(text):
    with pytest.raises(ConfigError):
        parse_text(text)


def test_comments_and_text_round_trip(tmp_path):
    cfg = parse_config(write(tmp_path, "# header\n" + MINIMAL_2D + "[output]\nsvg=false ; inline\n"))
    assert cfg.output["svg"] is False
    assert parse_text(cfg.to_text()) == cfg


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    text = capsys.readouterr().out
    for fragment in ("solver.m = 720", "solver.max_sweeps = 20000", "verify.eps = auto", "CGC_OUTPUT_ROOT"):
        assert fragment in text
    assert "scenario.t" in defaults_help()


def test_entry_points():
    out = subprocess.run([sys.executable, "-m", "cgc.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "exit codes" in out.stdout
    script = shutil.which("cgc")
    if script:
        assert subprocess.run([script, "--help"], capture_output=True).returncode == 0


def test_solve2d_run(tmp_path):
    code, outdir, manifest = run(tmp_path, "solve2d", MINIMAL_2D)
    assert code == 0 and manifest["status"] == "ok"
    assert manifest["results"]["hausdorff_to_oracle"] <= manifest["results"]["tolerance"]
    for name in ("body.txt", "oracle.txt", "overlay.svg", "config.resolved.ini"):
        assert (outdir / name).is_file()
    assert set(manifest["versions"]) >= {"python", "numpy", "numba"}
    assert config_from_manifest(outdir / "manifest.json") == parse_text(MINIMAL_2D)


def test_manifest_config_reparses(tmp_path):
    _, outdir, _ = run(tmp_path, "solve2d", MINIMAL_2D + "[solver]\nm=64\n")
    again = config_from_manifest(outdir / "manifest.json")
    assert parse_text(again.to_text()) == again
    assert parse_text((outdir / "config.resolved.ini").read_text()) == again


def test_verify_exit_codes(tmp_path):
    code, outdir, manifest = run(tmp_path, "verify", MINIMAL_2D, "ok")
    assert code == 0 and (outdir / "violations.csv").read_text().count("\n") == 1
    code, _, manifest = run(tmp_path, "verify", MINIMAL_2D + "[verify]\nt=2 interior=false points=32\n", "bad")
    assert code == 3 and manifest["status"] == "violations" and manifest["results"]["F_violations"] > 0


def test_verify_on_stored_body(tmp_path):
    code, outdir, _ = run(tmp_path, "solve2d", MINIMAL_2D + "[solver]\nm=360\n", "s")
    source = f"[verify]\nsource={outdir / 'oracle.txt'} points=128\n"
    # stored bodies are probed everywhere by default; the ball arcs are too curved for the dual test
    code, _, manifest = run(tmp_path, "verify", MINIMAL_2D + source, "all")
    assert code == 3 and manifest["results"]["F_violations"] == 0 and manifest["results"]["dual_violations"] > 0
    code, _, _ = run(tmp_path, "verify", MINIMAL_2D + source + "interior=true\n", "inside")
    assert code == 0


def test_config_error_exit(tmp_path):
    code, _, manifest = run(tmp_path, "solve2d", "t=2 R=1 dim=3\n")
    assert code == 1 and "k = R" in manifest["error"]
    code, _, manifest = run(tmp_path, "solve3d", MINIMAL_2D, "wrongdim")
    assert code == 1


def test_solve3d_and_non_convergence(tmp_path):
    code, outdir, manifest = run(tmp_path, "solve3d", CAP_3D.replace("h=0.0375", "h=0.075"))
    assert code == 0
    assert {"history.csv", "surface.csv", "surface.obj"} <= set(manifest["artifacts"])
    code, outdir, manifest = run(tmp_path, "solve3d", CAP_3D + "max_sweeps=10\n", "short")
    assert code == 2 and manifest["results"]["sweeps"] == 10
    assert (outdir / "history.csv").is_file() and (outdir / "surface.csv").is_file()


def test_solve3d_is_reproducible(tmp_path):
    _, a, _ = run(tmp_path, "solve3d", CAP_3D, "a")
    _, b, _ = run(tmp_path, "solve3d", CAP_3D, "b")
    for name in ("surface.csv", "history.csv", "surface.obj"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_convergence_run(tmp_path):
    code, outdir, manifest = run(tmp_path, "convergence", MINIMAL_2D + "[solver]\nm=256\n")
    assert code == 0 and manifest["results"]["min_ratio"] >= 1.5
    header = (outdir / "convergence.csv").read_text().splitlines()[0]
    assert header == "resolution,error,ratio"
    code, _, _ = run(tmp_path, "convergence", MINIMAL_2D + "[solver]\nlevels=2\n", "few")
    assert code == 1


def test_selftest_run(tmp_path):
    code, outdir, manifest = run(tmp_path, "selftest", MINIMAL_2D + "[verify]\nsamples=200\n")
    assert code == 0 and manifest["results"]["failed"] == 0
    assert (outdir / "selftest.csv").read_text().startswith("check,cone")


def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CGC_OUTPUT_ROOT", str(tmp_path / "root"))
    assert resolve_outdir("rel") == tmp_path / "root" / "rel"
    assert resolve_outdir(str(tmp_path / "abs")) == tmp_path / "abs"
