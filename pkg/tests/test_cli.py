import json

import pytest

from igo.cli import main
from igo.config import Config, ConfigError, load_config


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def jrun(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def write_cfg(tmp_path, **changes):
    cfg = load_config()
    for k, v in changes.items():
        setattr(cfg, k, v)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()))
    return str(p)


def test_fixed_point(capsys):
    d = jrun(capsys, "fixed-point")
    assert set(d) == {"X", "y0", "lambda", "T"}
    assert d["X"] == pytest.approx([269.5974, 84.5819, 13.6249], rel=1e-3)


def test_fixed_point_lambda_scaling(capsys):
    base = jrun(capsys, "fixed-point")["X"]
    assert jrun(capsys, "fixed-point", "--lambda", "0")["X"] == [0.0, 0.0, 0.0]
    assert jrun(capsys, "fixed-point", "--lambda", "600")["X"] == pytest.approx([2 * v for v in base], rel=1e-11)


def test_stability(capsys):
    d = jrun(capsys, "stability", "--Fp", "-1", "--Phip", "4")
    for key in ("J", "D", "jacobian", "eigenvalues", "rho", "lhs_linear", "stable",
                "stable_linear", "stable_det", "stable_eigen"):
        assert key in d
    assert d["stable"] is True
    assert d["rho"] == pytest.approx(0.5302, abs=1e-3)
    assert jrun(capsys, "stability", "--Fp", "-1", "--Phip", "5.5")["stable"] is False
    assert jrun(capsys, "stability", "--Fp", "0", "--Phip", "0")["rho"] == pytest.approx(0.4733, abs=1e-4)


def test_stability_bad_slopes(capsys):
    code, _, err = run(capsys, "stability", "--Fp", "1", "--Phip", "4")
    assert code == 2 and "slopes" in err


def test_simulate_one_cycle(capsys, tmp_path):
    code, out, err = run(capsys, "simulate", "--out", str(tmp_path), "--firings", "40")
    d = json.loads(out)
    assert code == 0 and d["classification"] == "1-cycle"
    assert d["period"] == pytest.approx(20.0, abs=1e-9)
    assert (tmp_path / "trace.csv").exists() and (tmp_path / "events.csv").exists()
    assert "1-cycle" in err


def test_simulate_two_cycle(capsys, tmp_path):
    d = jrun(capsys, "simulate", "--out", str(tmp_path), "--Phip", "5.5", "--x0", "270.6,84.58,13.64")
    assert d["classification"] == "2-cycle"


def test_simulate_zero_firings(capsys, tmp_path):
    d = jrun(capsys, "simulate", "--out", str(tmp_path), "--firings", "0")
    assert d["firings"] == 0
    assert (tmp_path / "events.csv").read_text().strip() == "n,t_n,y_n,T_n,lambda_n,X1,X2,X3"


def test_simulate_time_horizon(capsys, tmp_path):
    d = jrun(capsys, "simulate", "--out", str(tmp_path), "--time", "100")
    assert d["firings"] == 5


def test_out_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("IGO_OUT_DIR", str(tmp_path / "env"))
    jrun(capsys, "sweep")
    assert (tmp_path / "env" / "sweep.csv").exists()


def test_io_error(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, _ = run(capsys, "sweep", "--out", str(blocker / "sub"))
    assert code == 3


def test_invalid_inputs(capsys, tmp_path):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "fixed-point", "--config", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "fixed-point", "--config", str(bad))[0] == 2
    assert run(capsys, "simulate", "--x0", "1,2")[0] == 2
    assert run(capsys, "sweep", "--config", write_cfg(tmp_path, n_f=0))[0] == 2


def test_sweep(capsys, tmp_path):
    d = jrun(capsys, "sweep", "--out", str(tmp_path))
    assert d["c_J"] == pytest.approx(0.0138562, abs=1e-6)
    assert d["c_D"] == pytest.approx(-0.193447, abs=1e-6)
    assert d["reference_coefficients"] == {"c_J": 0.0454, "c_D": -0.855}
    border = json.loads((tmp_path / "border.json").read_text())
    assert border == d
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0] == "Fp,Phip,rho,stable_linear,stable_det"
    cells = {tuple(r.split(",")[:2]): r.split(",")[3] for r in rows[1:]}
    assert cells[("-1", "4")] == "true" and cells[("-1", "5.5")] == "false"


def test_sweep_single_cell(capsys, tmp_path):
    cfg = write_cfg(tmp_path, Fp_range=[0.0, 0.0], Phip_range=[0.0, 0.0], n_f=1, n_p=1)
    jrun(capsys, "sweep", "--config", cfg, "--out", str(tmp_path))
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].split(",")[3:] == ["true", "true"]


def test_design(capsys, tmp_path):
    d = jrun(capsys, "design", "--out", str(tmp_path))
    assert d["rho"] <= d["grid_rho"]
    assert d["report"]["stable"] is True
    assert json.loads((tmp_path / "design.json").read_text()) == d


@pytest.mark.parametrize("cmd", ["simulate", "sweep", "design"])
def test_byte_identical_reruns(capsys, tmp_path, cmd):
    a, b = tmp_path / "a", tmp_path / "b"
    out_a = run(capsys, cmd, "--out", str(a))[1]
    out_b = run(capsys, cmd, "--out", str(b))[1]
    assert out_a.replace(str(a), "") == out_b.replace(str(b), "")
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_config_round_trip(tmp_path):
    cfg = load_config()
    again = Config.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def test_config_rejects_unordered_rates():
    d = load_config().to_dict()
    d["plant"]["a"] = [0.1496, 0.0374, 0.374]
    with pytest.raises(ConfigError):
        Config.from_dict(d)
