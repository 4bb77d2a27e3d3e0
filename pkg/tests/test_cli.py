import json
from pathlib import Path

import pytest

from qutritchip import cli
from qutritchip.config import ConfigError, load_config, parse_config, resolve_seed
from qutritchip.errors import NumericalError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
PAPER = str(CONFIGS / "paper.json")
IDEAL = str(CONFIGS / "ideal.json")


def run(tmp_path, *args, sub="out"):
    out = tmp_path / sub
    code = cli.main([*args, "--out", str(out)])
    return code, out


def report(out, name):
    return json.loads((out / name).read_text())


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def test_spectrum(tmp_path):
    code, out = run(tmp_path, "spectrum", "--config", PAPER, "--range", "1540", "1565", "--points", "2001")
    assert code == 0
    rep = report(out, "spectrum_source1.json")
    assert rep["fsr_nm"] == pytest.approx(6.2, abs=0.2)
    assert (out / "spectrum_source1.csv").read_text().startswith("wavelength_nm,drop_power")


def test_spectrum_bad_range(tmp_path):
    assert run(tmp_path, "spectrum", "--range", "1560", "1550")[0] == 2
    assert run(tmp_path, "spectrum", "--source", "4")[0] == 2


def test_byte_identical_outputs(tmp_path):
    for sub in ("a", "b"):
        assert run(tmp_path, "fringes", "--config", PAPER, "--kind", "qubit", "--pair", "12",
                   "--seed", "3", "--gnuplot-stub", sub=sub)[0] == 0
        assert run(tmp_path, "spectrum", "--range", "1550", "1554", "--points", "501", sub=sub)[0] == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "fringe_qubit_12.gp" in names
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_fringes(tmp_path):
    code, out = run(tmp_path, "fringes", "--config", IDEAL, "--kind", "rhom", "--pair", "13")
    assert code == 0
    rep = report(out, "fringe_rhom_13.json")
    assert rep["visibility_model"] == pytest.approx(1.0, abs=1e-6)
    assert rep["visibility"] >= 0.98 and rep["std"] > 0
    run(tmp_path, "fringes", "--config", PAPER, "--kind", "rhom", "--pair", "12")
    run(tmp_path, "fringes", "--config", PAPER, "--kind", "qubit", "--pair", "12")
    r, q = report(out, "fringe_rhom_12.json"), report(out, "fringe_qubit_12.json")
    assert r["visibility_model"] >= 0.965
    assert q["period_rad"] == pytest.approx(2 * r["period_rad"])


def test_fringes_errors(tmp_path):
    assert run(tmp_path, "fringes", "--config", PAPER, "--kind", "rhom", "--pair", "99")[0] == 2
    assert run(tmp_path, "fringes", "--config", PAPER, "--kind", "hom", "--pair", "12")[0] == 2
    assert run(tmp_path, "fringes", "--kind", "rhom", "--pair", "12")[0] == 2   # no seed


def test_tomography(tmp_path):
    code, out = run(tmp_path, "tomography", "--config", IDEAL)
    assert code == 0 and report(out, "tomography.json")["fidelity"] >= 0.999
    code, out = run(tmp_path, "tomography", "--config", PAPER, "--threads", "4", sub="p")
    rep = report(out, "tomography.json")
    assert rep["fidelity"] == pytest.approx(0.955, abs=0.01)
    assert rep["max_imag"] < 0.03 and rep["mc_samples"] == 100
    assert (out / "rho.csv").exists() and (out / "tomography_counts.csv").exists()


def test_inequalities(tmp_path):
    assert run(tmp_path, "inequalities", "--which", "cglmp", "--config", IDEAL)[0] == 0
    out = tmp_path / "out"
    rows = (out / "cglmp_table.csv").read_text().splitlines()
    assert rows[0] == "probability,result,std,expected"
    for n, line in enumerate(rows[1:]):
        assert float(line.split(",")[3]) == pytest.approx(0.8293 if n % 2 == 0 else 0.1111, abs=5e-4)
    assert run(tmp_path, "inequalities", "--which", "ks", "--config", IDEAL)[0] == 0
    ks = report(out, "ks.json")
    assert [ks["conditionals_expected"][k] for k in ("D1_A", "T0_A", "T1_A")] == pytest.approx(
        [0.111, 0, 0], abs=1e-3)
    assert run(tmp_path, "inequalities", "--which", "qkd", "--fidelity", "0.955")[0] == 0
    q = report(out, "qkd.json")
    assert q["error_rate"] == pytest.approx(0.03375) and q["verdict"] == "secure"
    assert run(tmp_path, "inequalities", "--which", "chsh", "--seed", "1")[0] == 2


def test_metrology(tmp_path):
    cfg = write(tmp_path, "m.json", {"schema": 1, "noise": {"fidelity": 0.955},
                                     "metrology": {"grid_points": 13, "cut_points": 1001}})
    code, out = run(tmp_path, "metrology", "--config", cfg)
    assert code == 0
    rep = report(out, "metrology.json")
    assert sorted(map(len, rep["degenerate_groups"])) == [3, 3, 3]
    assert rep["max_group_spread"] < 1e-12
    assert abs(rep["averages"]["pairs"] - 1.476) <= 0.1
    code, out = run(tmp_path, "metrology", sub="ideal")
    assert report(out, "metrology.json")["averages"]["pairs"] > 0.78


def test_graph(tmp_path):
    code, out = run(tmp_path, "graph", str(CONFIGS / "graph_paper.json"))
    rep = report(out, "graph.json")
    assert code == 0 and rep["perfect_matchings"] == 3
    assert sorted(rep["terms"]) == ["|00>", "|11>", "|22>"] and rep["engine_agrees"]
    empty = write(tmp_path, "e.json", {"vertices": [], "edges": []})
    run(tmp_path, "graph", empty)
    rep = report(out, "graph.json")
    assert rep["perfect_matchings"] == 1 and "note" in rep
    c4 = write(tmp_path, "c4.json", {"vertices": list("abcd"), "edges": [
        {"u": u, "v": v, "mode": 0} for u, v in ("ab", "bc", "cd", "da")]})
    run(tmp_path, "graph", c4)
    assert report(out, "graph.json")["perfect_matchings"] == 2
    assert run(tmp_path, "graph", write(tmp_path, "bad.json", "{not json"))[0] == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NumericalError("singular")
    monkeypatch.setattr(cli, "cmd_metrology", boom)
    assert run(tmp_path, "metrology")[0] == 3


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        parse_config({"schema": 2})
    with pytest.raises(ConfigError):
        parse_config({"schema": 1, "noise": {"fidelity": 0.9, "white_noise_weight": 0.1}})
    with pytest.raises(ConfigError):
        parse_config({"schema": 1, "counts": {"pairrate": 1}})
    with pytest.raises(ConfigError):
        parse_config({"schema": 1, "sources": [{"radius_um": 15, "colour": 1}]})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    cfg = load_config(PAPER)
    assert cfg.noise.white_noise_weight == pytest.approx(0.050625)
    assert len(cfg.sources) == 3
    assert run(tmp_path, "metrology", "--config", write(tmp_path, "x.json", {"schema": 1, "x": 0}))[0] == 2


def test_seed_precedence():
    cfg = parse_config({"schema": 1, "seed": 5})
    assert resolve_seed(None, cfg, {}) == 5
    assert resolve_seed(None, cfg, {"QSIM_SEED": "8"}) == 8
    assert resolve_seed(3, cfg, {"QSIM_SEED": "8"}) == 3
    with pytest.raises(ConfigError):
        resolve_seed(None, cfg, {"QSIM_SEED": "abc"})


def test_env_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("QSIM_SEED", "17")
    code, out = run(tmp_path, "fringes", "--kind", "qubit", "--pair", "23")
    assert code == 0 and report(out, "fringe_qubit_23.json")["seed"] == 17
