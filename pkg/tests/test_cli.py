import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from hjlab import __version__, cli
from hjlab.errors import SearchRadiusError


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = cli.main(list(args) + ["--out", str(out)])
    return code, out


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith(f"# hjlab {__version__} config_sha256=")
    rows = list(csv.DictReader(lines[1:]))
    return lines[0], rows


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_solve_linear_matches_closed_form(tmp_path):
    code, out = run(["solve", "--config", "linear.json"], tmp_path)
    assert code == 0
    _, rows = read_csv(out / "solve.csv")
    a = np.array([0.5, -0.25])
    X = np.array([[float(r["x0"]), float(r["x1"])] for r in rows])
    u = np.array([float(r["u"]) for r in rows])
    b = np.array([[float(r["b0"]), float(r["b1"])] for r in rows])
    assert np.max(np.abs(u - (X @ a - a @ a))) <= 1e-9
    assert np.max(np.abs(b - 2 * a)) <= 1e-6
    side = json.loads((out / "solve.json").read_text())
    assert side["version"] == __version__ and side["table"] == "solve.csv"


def test_solve_zero_datum(tmp_path):
    code, out = run(["solve", "--config", "zero.json"], tmp_path)
    assert code == 0
    _, rows = read_csv(out / "solve.csv")
    assert all(float(r["u"]) == 0 and float(r["b0"]) == 0 for r in rows)


def test_solve_rejects_nonpositive_time(tmp_path):
    cfg = {"hamiltonian": {"kind": "power_norm", "k": 1, "dim": 1},
           "solve": {"datum": {"family": "cone"}, "grid": {"lo": [-1], "hi": [1], "n": 5}, "t": 0.0}}
    code, _ = run(["solve", "--config", write_cfg(tmp_path, cfg)], tmp_path)
    assert code == 2


@pytest.mark.parametrize("cfg", [
    {"hamiltonian": {"kind": "power_norm"}, "bogus": 1},
    {"hamiltonian": {"kind": "power_norm"}, "solve": {"tt": 1.0}},
    {"hamiltonian": {"kind": "power_norm", "q": 1}},
    {"hamiltonian": {"kind": "power_norm"}, "solve": {"datum": {"family": "linear", "slope": 1}}},
    {"solve": {}},
])
def test_config_errors_exit_2(tmp_path, cfg):
    code, _ = run(["solve", "--config", write_cfg(tmp_path, cfg)], tmp_path)
    assert code == 2


def test_missing_or_malformed_config(tmp_path):
    assert run(["solve", "--config", str(tmp_path / "nope.json")], tmp_path)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["solve", "--config", str(bad)], tmp_path)[0] == 2


def test_outputs_are_deterministic_and_stamped(tmp_path):
    _, a = run(["solve", "--config", "linear.json"], tmp_path, "a")
    _, b = run(["solve", "--config", "linear.json"], tmp_path, "b")
    assert (a / "solve.csv").read_bytes() == (b / "solve.csv").read_bytes()
    assert (a / "solve.json").read_bytes() == (b / "solve.json").read_bytes()
    _, c = run(["solve", "--config", "linear.json", "--seed", "7"], tmp_path, "c")
    h_a = json.loads((a / "solve.json").read_text())["config_sha256"]
    h_c = json.loads((c / "solve.json").read_text())["config_sha256"]
    assert h_a != h_c
    assert json.loads((c / "solve.json").read_text())["config"]["seed"] == 7


def test_csv_uses_17_significant_digits(tmp_path):
    _, out = run(["legendre", "--config", "legendre_quartic.json"], tmp_path)
    _, rows = read_csv(out / "legendre.csv")
    assert rows[0]["q0"] == format(0.3, ".17g")
    assert float(rows[0]["L_numeric"]) == pytest.approx(float(rows[0]["L_closed"]), abs=1e-8)


def test_json_format(tmp_path):
    code, out = run(["moduli", "--config", "moduli.json", "--format", "json"], tmp_path)
    assert code == 0 and not (out / "moduli.csv").exists()
    doc = json.loads((out / "moduli.json").read_text())
    assert doc["columns"][0] == "kind" and len(doc["rows"]) == 6
    speed = [r[2] for r in doc["rows"] if r[0] == "M"]
    assert all(b > a for a, b in zip(speed, speed[1:]))


def test_bv_check_zero_row(tmp_path):
    code, out = run(["bv-check", "--config", "zero.json"], tmp_path)
    assert code == 0
    _, rows = read_csv(out / "bv_check.csv")
    assert float(rows[0]["lhs"]) == 0 and rows[0]["holds"] == "true"


def test_bv_check_quartic_not_applicable(tmp_path):
    cfg = {"hamiltonian": {"kind": "quartic2d"},
           "bv-check": {"n_seeds": 2, "omega": {"lo": [-1, -1], "hi": [1, 1]}, "n": 11}}
    code, out = run(["bv-check", "--config", write_cfg(tmp_path, cfg)], tmp_path)
    assert code == 0
    _, rows = read_csv(out / "bv_check.csv")
    assert all(r["applicable"] == "false" for r in rows)


def test_bv_check_quadratic_2d_holds(tmp_path):
    cfg = {"hamiltonian": {"kind": "power_norm", "k": 1, "dim": 2},
           "bv-check": {"n_seeds": 5, "omega": {"lo": [-1, -1], "hi": [1, 1]}, "n": 41}}
    code, out = run(["bv-check", "--config", write_cfg(tmp_path, cfg)], tmp_path)
    assert code == 0
    _, rows = read_csv(out / "bv_check.csv")
    assert all(r["holds"] == "true" and float(r["rhs"]) == pytest.approx(60.28, abs=0.01) for r in rows)


@pytest.mark.parametrize("name,expo", [("entropy_pn2_d1.json", 3.0), ("entropy_pn1_d1.json", 1.0)])
def test_entropy_exponent_column(tmp_path, name, expo):
    code, out = run(["entropy", "--config", name], tmp_path)
    assert code == 0
    _, rows = read_csv(out / "entropy.csv")
    assert {"epsilon", "N_cover", "P_pack", "lower_bound", "upper_bound"} <= set(rows[0])
    assert all(float(r["theoretical_exponent"]) == expo for r in rows)
    assert all(int(r["P_pack_2eps"]) <= int(r["N_cover"]) <= int(r["P_pack"]) for r in rows)
    doc = json.loads((out / "entropy.json").read_text())
    assert doc["bound_slopes"]["upper"] == pytest.approx(expo, rel=0.02)


def test_entropy_empty_grid(tmp_path):
    cfg = {"hamiltonian": {"kind": "power_norm", "k": 1, "dim": 1}, "entropy": {"eps_grid": []}}
    assert run(["entropy", "--config", write_cfg(tmp_path, cfg)], tmp_path)[0] == 2


def test_numeric_failure_exit_3(tmp_path, monkeypatch):
    import hjlab.hopflax as hl

    def boom(*a, **k):
        raise SearchRadiusError("minimizer on the search-ball boundary")

    monkeypatch.setattr(hl, "solve", boom)
    assert run(["solve", "--config", "zero.json"], tmp_path)[0] == 3


def test_verdict_failure_exit_4(tmp_path, monkeypatch):
    import hjlab.bv as bv

    real = bv.bv_bound_check

    def failing(*a, **k):
        v = real(*a, **k)
        v.holds = False
        return v

    monkeypatch.setattr(bv, "bv_bound_check", failing)
    code, out = run(["bv-check", "--config", "zero.json"], tmp_path)
    assert code == 4 and (out / "bv_check.csv").exists()


@pytest.mark.slow
def test_counterexample_end_to_end(tmp_path):
    code, out = run(["counterexample", "--config", "counterexample.json"], tmp_path)
    assert code == 0
    _, rows = read_csv(out / "counterexample.csv")
    assert [float(r["delta"]) for r in rows] == [0.04, 0.02, 0.01, 0.005]
    tv = [float(r["tv_b"]) for r in rows]
    du = [float(r["tv_du"]) for r in rows]
    assert all(b > a for a, b in zip(tv, tv[1:])) and all(b > a for a, b in zip(du, du[1:]))
    doc = json.loads((out / "counterexample.json").read_text())
    fit = doc["fits"]["stated"]
    assert abs(fit["exponent"] - 1 / 3) <= 0.15 and fit["band95"][0] <= fit["exponent"] <= fit["band95"][1]
    assert doc["doubling"]["ratio"] == pytest.approx(4, rel=0.3)


def test_console_script_and_env_flag(tmp_path):
    """The installed entry point works with the numpy fallback forced on."""
    env = {"HJLAB_NO_NUMBA": "1", "PATH": "/usr/local/bin:/usr/bin:/bin"}
    code = "import sys; from hjlab import _accel, cli; assert not _accel.use_numba(); sys.exit(cli.main(sys.argv[1:]))"
    proc = subprocess.run([sys.executable, "-c", code, "solve", "--config", "zero.json", "--out", str(tmp_path)],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "solve.csv").exists()
