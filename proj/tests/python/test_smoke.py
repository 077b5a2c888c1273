import json

import numpy as np
import pytest

cirsense = pytest.importorskip("cirsense")

SMALL = {
    "grid": {"n_cols": 4, "n_rows": 3, "expected_points": None},
    "sweep": {"num_points": 64},
    "features": {"k_taps": 16},
    "split": {"test_count": 3},
    "models": {
        "nn": {"epochs": 2, "blocks": 1, "channels": 4, "dense_units": 8},
        "gbt": {"grid": {"n_estimators": [3], "max_depth": [2], "learning_rate": [0.3]}},
    },
    "experiments": [{"task": "position", "models": ["typec", "baseline"], "combos": ["N2", "N234"]}],
}


def test_inverse_dft_matches_numpy():
    rng = np.random.default_rng(0)
    for n in (4, 7, 64, 1001):
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        np.testing.assert_allclose(cirsense.inverse_dft(x), np.fft.ifft(x), atol=1e-12)


def test_single_path_sweep_has_unit_magnitude():
    s = cirsense.synthesize_sweep([(1 + 0j, 10e-9, 0.0)], num_points=33)
    assert s.shape == (33,)
    np.testing.assert_allclose(np.abs(s), 1.0, atol=1e-12)


def test_default_config_round_trips():
    cfg = cirsense.default_config()
    assert cfg["grid"]["expected_points"] == 462
    assert cfg["receiver_ids"] == [2, 3, 4]


def test_simulate_shapes(tmp_path):
    d = cirsense.simulate(SMALL, tmp_path / "d.bin")
    assert d["features"].shape == (24, 3, 16)
    assert int(d["hypothesis"].sum()) == 12
    assert np.isnan(d["position_m"][d["hypothesis"] == 0]).all()
    again = cirsense.load_dataset(tmp_path / "d.bin")
    np.testing.assert_array_equal(again["features"], d["features"])


def test_config_errors_list_violations():
    bad = dict(SMALL, grid={"n_cols": 20, "n_rows": 22, "expected_points": 462})
    with pytest.raises(cirsense.ConfigError, match="462"):
        cirsense.simulate(bad)


def test_gbt_memorizes():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(8, 3))
    y = rng.normal(size=(8, 2))
    e = cirsense.fit_gbt(x, y, n_estimators=3, max_depth=8, learning_rate=1.0, reg_lambda=0.0)
    assert e.outputs == 2
    np.testing.assert_allclose(e.predict(x), y, atol=1e-6)


def test_reproduce_is_deterministic(tmp_path):
    a = cirsense.reproduce(SMALL, tmp_path / "a")
    b = cirsense.reproduce(SMALL, tmp_path / "b")
    assert [r["mean_error_m"] for r in a] == [r["mean_error_m"] for r in b]
    assert len(a) == 4
    assert (tmp_path / "a" / "reports.csv").read_bytes() == (tmp_path / "b" / "reports.csv").read_bytes()
    loaded = cirsense.load_reports(tmp_path / "a" / "reports.json")
    assert json.dumps(loaded, sort_keys=True) == json.dumps(a, sort_keys=True)
