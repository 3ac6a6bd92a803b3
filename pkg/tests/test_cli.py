import numpy as np
import pytest

from biphoton_fwm import cli, io


@pytest.fixture(autouse=True)
def _outdir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUTDIR, str(tmp_path / "envout"))
    monkeypatch.chdir(tmp_path)


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    rc = cli.main(["run", "--modes", "15", "--kappa", "0.2", "--steps", "5", "--envelope", "gaussian:7,2",
                   "--out", str(out)])
    assert rc == 0
    for name in ("run_diagonal.csv", "run_intensity.csv", "run_grid.csv", "run.gp"):
        assert (out / name).exists()
    header, rows = io.read_table(out / "run_diagonal.csv")
    assert rows.shape == (6 * 15, 6)
    assert "norm_drift" in capsys.readouterr().out


def test_run_full_cycle_flips_sign(tmp_path, capsys):
    rc = cli.main(["run", "--modes", "45", "--kappa", repr(np.pi / 45), "--steps", "45"])
    assert rc == 0
    text = capsys.readouterr().out
    line = next(l for l in text.splitlines() if l.startswith("sign_flip_diagonal"))
    assert float(line.split("=")[1]) < 1e-12
    assert (tmp_path / "envout" / "run_grid.csv").exists()


def test_run_with_oracle(capsys):
    rc = cli.main(["run", "--modes", "9", "--kappa", "0.1", "--steps", "3", "--envelope", "gaussian:4,1",
                   "--dt-divisor", "200"])
    assert rc == 0
    line = next(l for l in capsys.readouterr().out.splitlines() if l.startswith("rk4_l2_distance"))
    assert float(line.split("=")[1]) < 1e-8


@pytest.mark.parametrize("argv", [
    ["run", "--envelope", "gauss:3"],
    ["run", "--mask", "window:30,10"],
    ["run", "--modes", "0"],
    ["run", "--oracle", "none", "--dt-divisor", "10"],
    ["validate", "--all", "--scenario", "fig1"],
    ["validate"],
    ["sweep", "--kappas", "0.1", "--kappa-range", "0:1:3"],
    ["sweep", "--kappa", "0.1", "--kappas", "0.2"],
    ["sweep", "--kappas", "0.1,abc"],
    ["bogus"],
])
def test_usage_errors(argv, capsys):
    assert cli.main(argv) == 2


def test_bad_token_is_reported(capsys):
    assert cli.main(["run", "--envelope", "gaussian:3;1"]) == 2
    assert "gaussian:3;1" in capsys.readouterr().err


def test_config_file_precedence(tmp_path):
    cfg_file = tmp_path / "sim.cfg"
    cfg_file.write_text("# comment\nmodes = 21\nsteps=7\nenvelope = point:3\n")
    cfg = cli.parse_args(["run", "--config", str(cfg_file), "--steps", "9"])
    assert cfg.modes == 21
    assert cfg.steps == 9
    assert cfg.envelope == "point:3"
    assert cfg.kappa == pytest.approx(np.pi / 45)


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("frobnicate = 3\n")
    assert cli.main(["run", "--config", str(bad)]) == 2
    bad.write_text("modes = many\n")
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_env_outdir_and_flag(tmp_path):
    assert cli.parse_args(["run"]).outdir == tmp_path / "envout"
    assert cli.parse_args(["run", "--out", "x"]).outdir.name == "x"


def test_sweep(tmp_path):
    out = tmp_path / "sw"
    rc = cli.main(["sweep", "--modes", "9", "--steps", "4", "--envelope", "gaussian:4,1",
                   "--kappa-range", "0:0.3:4", "--out", str(out)])
    assert rc == 0
    header, rows = io.read_table(out / "sweep.csv")
    assert header == cli.SWEEP_HEADER
    np.testing.assert_allclose(rows[:, 0], [0, 0.1, 0.2, 0.3])


def test_params(capsys):
    rc = cli.main(["params", "--density", "1e18", "--lambda", "795e-9", "--gamma", "3.6e7", "--delta", "6.28e9"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "kappa" in text and "pi/(2 kappa)" in text
    assert cli.main(["params", "--density", "1e18", "--lambda", "795e-9", "--gamma", "3.6e7",
                     "--delta", "0"]) == 2


def test_validate_list_and_single(tmp_path, capsys):
    assert cli.main(["validate", "--list"]) == 0
    assert "fig1" in capsys.readouterr().out
    assert cli.main(["validate", "--scenario", "fig2", "--out", str(tmp_path / "v")]) == 0
    assert (tmp_path / "v" / "fig2_report.txt").exists()
    assert cli.main(["validate", "--scenario", "nope"]) == 2
