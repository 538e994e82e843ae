import json

import pytest

from stretchlab.cli import main

CONFIG = """
[group]
rank = 2
separation = 4.0
eps = 0.001
seed = 1

[spectrum]
n_max = 10

[germ]
grid = 12
beta = constant
c = 1.0
t_max = 0.3
steps = 20
"""


@pytest.fixture
def workdir(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(CONFIG)
    return tmp_path, str(cfg)


def run(cfg, cmd, out, cache=None):
    argv = [cmd, "--config", cfg, "--out", str(out)]
    if cache is not None:
        argv += ["--cache", str(cache)]
    return main(argv)


def test_gen_writes_spec_and_certificate(workdir):
    tmp, cfg = workdir
    assert run(cfg, "gen", tmp / "out") == 0
    assert (tmp / "out" / "spec.txt").exists()
    cert = json.loads((tmp / "out" / "certificate.json").read_text())
    assert cert["ok"] is True
    assert cert["sides"]["g"]["letter_bound"] > 0


def test_spectrum_cache_hit_is_byte_identical(workdir):
    tmp, cfg = workdir
    assert run(cfg, "spectrum", tmp / "o1", tmp / "cache") == 0
    assert run(cfg, "spectrum", tmp / "o2", tmp / "cache") == 0
    a = (tmp / "o1" / "spectrum.csv").read_bytes()
    b = (tmp / "o2" / "spectrum.csv").read_bytes()
    assert a == b
    assert len(list((tmp / "cache").glob("spectrum_*.csv"))) == 1


def test_stretch_and_entropy_deterministic(workdir):
    tmp, cfg = workdir
    for sub in ("stretch", "entropy"):
        assert run(cfg, sub, tmp / "o1", tmp / "cache") == 0
        assert run(cfg, sub, tmp / "o2", tmp / "cache") == 0
        name = f"{sub}.json"
        assert (tmp / "o1" / name).read_bytes() == (tmp / "o2" / name).read_bytes()


def test_report_emits_plots(workdir):
    tmp, cfg = workdir
    assert run(cfg, "report", tmp / "out", tmp / "cache") == 0
    for name in ("report.json", "log_counts.svg", "orbit_pressure.svg"):
        assert (tmp / "out" / name).exists()
    svg = (tmp / "out" / "log_counts.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_germ_outputs(workdir):
    tmp, cfg = workdir
    assert run(cfg, "germ", tmp / "out") == 0
    payload = json.loads((tmp / "out" / "germ.json").read_text())
    assert abs(payload["kappa"] - 0.5) <= 1e-3
    assert payload["udot_all_negative"] is True
    assert abs(payload["fold_t_squared"] - 0.5) <= 1e-4
    assert "normalization_note" in payload and payload["normalization_note"]
    rows = (tmp / "out" / "germ_ray.csv").read_text().strip().split("\n")
    assert rows[0] == "t,u_min,u_max,udot_min,af_margin,residual"
    assert len(rows) == 22


def test_thermo_selftest_exit_code(capsys):
    assert main(["thermo-selftest"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_config_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[group]\nrank = 1\n")
    assert main(["gen", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    bad.write_text("[group]\nwhat = 3\n")
    assert main(["gen", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    bad.write_text("[nosuch]\nx = 1\n")
    assert main(["gen", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["gen", "--config", str(tmp_path / "missing.ini"), "--out", "o"]) == 2


def test_numerical_failure_exit_3(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[group]\nrank = 2\nseparation = 2.05\n")
    assert main(["gen", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_incomplete_window_exit_4(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[group]\nrank = 2\nseparation = 4.0\n"
        "[spectrum]\nn_max = 10\n"
        "[stretch]\ntruncation = 1000\n"
    )
    code = main(
        [
            "stretch",
            "--config",
            str(cfg),
            "--out",
            str(tmp_path / "o"),
            "--cache",
            str(tmp_path / "c"),
        ]
    )
    assert code == 4
