import csv

import pytest

from pnoma import analytic, cli
from pnoma.spectral import ConfigError, interference_factor


def body(path):
    # drop the timestamped header line
    return path.read_text().split("\n", 1)[1]


def rows(path):
    return list(csv.DictReader(body(path).splitlines()))


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = cli.main(list(argv) + ["-o", str(out)])
    return code, out


@pytest.mark.parametrize("text,expected", [
    ("0:0.25:1", [0.0, 0.25, 0.5, 0.75, 1.0]),
    ("-10:5:10", [-10.0, -5.0, 0.0, 5.0, 10.0]),
    ("0:0.3:1", [0.0, 0.3, 0.6, 0.9]),
    ("1/3,0.5", [1 / 3, 0.5]),
    ("2", [2.0]),
])
def test_parse_grid(text, expected):
    assert cli.parse_grid(text) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("text", ["0:1", "1:0:2", "2:1:1", "a,b"])
def test_parse_grid_rejects(text):
    with pytest.raises(ConfigError):
        cli.parse_grid(text)


def test_ifactor_auto_grid(tmp_path):
    code, out = run(tmp_path, "ifactor", "--alpha", "0.25,1")
    assert code == 0
    got = rows(out)
    assert len(got) == 11 + 1
    for r in got:
        assert float(r["i_factor"]) == pytest.approx(interference_factor(float(r["alpha"]), float(r["beta"])),
                                                     abs=1e-11)


def test_beta_outside_triangle_exits_1(tmp_path, capsys):
    code, out = run(tmp_path, "coverage-analytic", "--alpha", "0.25", "--beta", "0.8")
    assert code == 1
    assert "1 - alpha" in capsys.readouterr().err
    assert not out.exists()


def test_bad_flag_exits_1(tmp_path):
    code, _ = run(tmp_path, "coverage-analytic", "--no-such-flag")
    assert code == 1


def test_quadrature_failure_exits_2(tmp_path, monkeypatch):
    def broken(*a, **k):
        raise analytic.QuadratureError("forced")
    monkeypatch.setattr(analytic, "coverage_from_thresholds", broken)
    code, out = run(tmp_path, "coverage-analytic", "--theta-db", "0")
    assert code == 2
    assert not out.exists()


def test_failed_write_leaves_previous_file(tmp_path, monkeypatch):
    code, out = run(tmp_path, "coverage-analytic", "--theta-db", "0")
    assert code == 0
    before = out.read_text()

    def broken(*a, **k):
        raise analytic.QuadratureError("forced")
    monkeypatch.setattr(analytic, "coverage_from_thresholds", broken)
    code, _ = run(tmp_path, "coverage-analytic", "--theta-db", "-5:1:5")
    assert code == 2
    assert out.read_text() == before
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# example\ncommand = coverage-analytic\nalpha = 0.75\ntheta-db = -2,0\nlam = 1\n")
    code, out = run(tmp_path, "--config", str(cfg), "--lam", "10")
    assert code == 0
    got = rows(out)
    assert [float(r["theta1_db"]) for r in got] == [-2.0, 0.0]
    assert all(float(r["alpha"]) == 0.75 for r in got)
    assert all(float(r["lam"]) == 10.0 for r in got)


def test_config_unknown_key_exits_1(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("command = coverage-analytic\nlambda = 3\n")
    code, _ = run(tmp_path, "--config", str(cfg))
    assert code == 1


def test_figure_preset_with_override(tmp_path):
    code, out = run(tmp_path, "--figure", "fig6", "--alpha", "0.5,0.6")
    assert code == 0
    got = rows(out)
    assert len(got) == 2 * 3
    at_1db = {float(r["alpha"]): float(r["p_cov1"]) for r in got if float(r["theta1_db"]) == 1.0}
    assert at_1db[0.6] == 0.0 and at_1db[0.5] > 0.0


def test_figure_rejects_explicit_command(tmp_path):
    code, _ = run(tmp_path, "--figure", "fig6", "ifactor")
    assert code == 1


def test_noise_db_converted(tmp_path):
    code, out = run(tmp_path, "coverage-analytic", "--noise-db", "-60")
    assert code == 0
    assert float(rows(out)[0]["sigma2"]) == pytest.approx(1e-6, rel=1e-12)


def test_rerun_is_byte_identical(tmp_path):
    argv = ["allocate", "--alpha", "0.5", "--tmt", "0.05", "--theta-db-step", "2", "--p-step", "0.05",
            "--beta-divisions", "5", "--method", "both"]
    _, a = run(tmp_path, *argv, name="a.csv")
    _, b = run(tmp_path, *argv, name="b.csv")
    assert body(a) == body(b)


def test_mc_identical_across_threads(tmp_path):
    argv = ["coverage-mc", "--alpha", "0.25", "--beta", "0", "--theta-db", "-2,4", "--trials", "20000",
            "--seed", "11"]
    _, a = run(tmp_path, *argv, "--threads", "1", name="a.csv")
    _, b = run(tmp_path, *argv, "--threads", "4", name="b.csv")
    assert body(a) == body(b)
    assert "mc_cov1" in body(a).splitlines()[0]
