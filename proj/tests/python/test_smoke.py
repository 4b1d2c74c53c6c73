import csv
import math

import pytest

import netloss

EX1_A = [[1.0, 0.1], [-0.5, 1.1]]
EX1_B = [[0.1], [1.2]]


def test_presets_listed_and_parse():
    names = netloss.presets()
    assert "example1" in names and "example2-selective" in names
    assert netloss.preset("example2-tau2")["channel"]["attack"]["tau"] == 2


def test_run_preset_tau2_diverges():
    r = netloss.run("preset:example2-tau2", paths=5)
    assert len(r["summary"]) == 5
    assert all(s["verdict"] == "diverged" for s in r["summary"])
    assert r["certificates"]["instability"]["pass"] is True


def test_run_inline_dict_is_deterministic():
    spec = {
        "plant": {"A": 2, "B": 1},
        "controller": {"K": -1.75, "P": 1, "beta": 0.0625, "theta": 1},
        "channel": {"random": {"kind": "bernoulli", "p": 0.3}},
        "sim": {"x0": [1], "horizon": 100, "seed": 4},
        "paths": 3,
        "outputs": ["ln_v"],
    }
    a = netloss.run(spec)
    b = netloss.run(spec)
    assert a == b
    assert netloss.run(spec, seed=5) != a


def test_run_to_dir_writes_csv(tmp_path):
    netloss.run_to_dir("preset:example2-tau3", tmp_path, paths=2)
    with open(tmp_path / "summary.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    assert {"path", "seed", "verdict"} <= set(rows[0])


def test_scalar_certificates_split_at_two_thirds():
    for r in (0.6, 0.66, 0.67, 0.75):
        st = netloss.check_stability(2, 1, -1.75, 1, 0.0625, 4, r)
        un = netloss.check_instability(2, 1, -1.75, 1, 0.0625, 4, r)
        assert st["pass"] == (r < 2 / 3)
        assert un["pass"] == (r > 2 / 3)


def test_example1_gain_and_certificate():
    k, p = netloss.gain_from_qm([[0.618, -2.119], [-2.119, 28.214]], [[0.202, -20.405]])
    c = netloss.check_stability(EX1_A, EX1_B, k, p, 0.55, 2.4516, 0.4)
    assert c["pass"]
    assert -1e-3 < c["exponent"] < 0


def test_design_and_infeasible():
    d = netloss.design(EX1_A, EX1_B, 0.4, beta_grid=[0.55 - 0.05 * j for j in range(11)])
    assert d["certificate"]["pass"] is True
    with pytest.raises(netloss.InfeasibleDesign):
        netloss.design(2, 1, 0.99)


def test_tail_bounds():
    assert netloss.chernoff_phi(0.5, 0.25) == pytest.approx(3.0)
    assert netloss.psi_k(0.5, 0.25, 2) == pytest.approx(2.5)
    exact = netloss.exact_tail({"kind": "bernoulli", "p": 0.25}, 20, 0.5)
    binom = sum(math.comb(20, j) * 0.25**j * 0.75 ** (20 - j) for j in range(11, 21))
    assert exact == pytest.approx(binom, abs=1e-12)
    assert netloss.jamming_tail_bound(2, 5, 0.21, 100) == pytest.approx(math.e, rel=1e-9)


def test_errors_map_to_python_types(tmp_path):
    with pytest.raises(ValueError, match="colour"):
        netloss.run({"plant": {"A": 0, "B": 1}, "controller": {"K": 0, "P": 1, "beta": 0.5},
                     "sim": {"x0": [1]}, "outputs": ["ln_v"], "colour": 1})
    with pytest.raises(OSError):
        netloss.run(tmp_path / "missing.json")
    with pytest.raises(ValueError):
        netloss.psi_k(0.1, 0.25, 3)
