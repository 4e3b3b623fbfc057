import json

import pytest

from liouville.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from liouville.config import ConfigError, RunConfig, parse_config

DIPOLE = ["--set", "terms=1:1,0"]


def run(tmp_path, command, *extra, out="out"):
    code = main([command, "-o", str(tmp_path / out), *extra])
    return code, tmp_path / out


def load(path):
    return json.loads(path.read_text())


def test_minimal_config_gets_defaults(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("seed = 7   # only this\n")
    cfg, applied = parse_config(path, ["nu=0.02"])
    assert cfg.seed == 7 and cfg.nu == 0.02 and applied == {"nu": 0.02}
    assert (cfg.N, cfg.n, cfg.L, cfg.kind) == (RunConfig.N, RunConfig.n, RunConfig.L, RunConfig.kind)


@pytest.mark.parametrize("bad", ["n=100", "foo=1", "scan_case=diag3", "dt=0.03", "width=5", "nu=abc", "symmetry=cubic"])
def test_invalid_config_exits_2(tmp_path, bad):
    with pytest.raises(ConfigError):
        parse_config(None, [bad])
    code, _ = run(tmp_path, "verify", "--set", bad)
    assert code == EXIT_CONFIG


def test_verify_radial(tmp_path):
    code, out = run(tmp_path, "verify", "--set", "seed=11")
    assert code == EXIT_OK
    verdict = load(out / "verdict.json")
    assert verdict["case"] == "equipartition_case" and verdict["passed"]
    manifest = load(out / "manifest.json")
    assert manifest["overrides"]["seed"] == 11
    assert manifest["artifacts"] == ["manifest.json", "verdict.json"]
    assert manifest["tolerances"]["tol_cross"] == RunConfig.tol_cross


def test_verify_dipole_not_l1(tmp_path):
    code, out = run(tmp_path, "verify", *DIPOLE)
    assert code == EXIT_OK
    assert load(out / "verdict.json")["l1_class"] == "log_divergent"


def test_scan_dipole_plateau(tmp_path):
    code, out = run(tmp_path, "scan", *DIPOLE, "--set", "plots=true")
    assert code == EXIT_OK
    verdict = load(out / "verdict.json")
    assert verdict["flags"]["I6"] == "plateau"
    assert abs(verdict["cutoff_residue"] - 0.39269908169872414) < 1e-3
    header = (out / "scan.csv").read_text().splitlines()[0]
    assert header == "R,I1,I2,I3,I4,I5,I6,cutoff_sum,total"
    assert (out / "scan.svg").read_text().count("<desc>") == 1


def test_cfl_violation_stops_before_stepping(tmp_path):
    code, out = run(tmp_path, "evolve", "--set", "kind=stream2d", "--set", "terms=1:4,0;-1:0,4", "--set", "dt=0.1", "--set", "T=1")
    assert code == EXIT_CONFIG
    assert not (out / "series.csv").exists()


def test_io_failure_exits_3(tmp_path):
    (tmp_path / "blocker").write_text("")
    code, _ = run(tmp_path, "verify", out="blocker/out")
    assert code == EXIT_IO
    code, _ = run(tmp_path, "report", out="empty")
    assert code == EXIT_IO
    assert main(["verify", "-c", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def test_pressure_and_report(tmp_path):
    code, out = run(tmp_path, "pressure", "--set", "n=128")
    assert code == EXIT_OK
    assert (out / "pressure.lvf1").exists() and (out / "shells.csv").exists()
    assert main(["report", "-o", str(out)]) == EXIT_OK
    assert "shells.svg" in load(out / "manifest.json")["artifacts"]


def test_reruns_are_byte_identical(tmp_path, monkeypatch):
    outputs = []
    for name in ("a", "b"):
        (tmp_path / name).mkdir()
        monkeypatch.chdir(tmp_path / name)
        assert main(["scan", *DIPOLE, "--set", "plots=true", "-o", "out"]) == EXIT_OK
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name / "out").iterdir())})
    assert outputs[0] == outputs[1]
