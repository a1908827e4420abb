import numpy as np
import pytest

import trnn


def test_mode_product_matches_einsum():
    rng = np.random.default_rng(0)
    t = rng.standard_normal((3, 4, 5))
    m = rng.standard_normal((6, 4))
    got = trnn.mode_n_product(t, m, 2)
    assert got.shape == (3, 6, 5)
    np.testing.assert_allclose(got, np.einsum("aib,ji->ajb", t, m), rtol=1e-12, atol=1e-12)


def test_contraction_and_tucker_match_einsum():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 3))
    c = rng.standard_normal((2, 3, 4))
    np.testing.assert_allclose(trnn.contraction(x, c), np.einsum("ij,ijk->k", x, c), atol=1e-12)
    core = rng.standard_normal((2, 2))
    u, v = rng.standard_normal((4, 2)), rng.standard_normal((3, 2))
    np.testing.assert_allclose(
        trnn.tucker_reconstruct(core, [u, v]), u @ core @ v.T, atol=1e-12
    )


def test_shape_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        trnn.mode_n_product(np.zeros((2, 3)), np.zeros((2, 2)), 2)


def test_rmse_is_relative_squared_error():
    y = np.arange(1.0, 7.0).reshape(2, 3)
    assert trnn.rmse(y, y) == 0.0
    assert trnn.rmse(np.zeros_like(y), y) == 1.0


def test_generate_shapes_and_determinism():
    x, y, meta = trnn.generate("waterdrop", 5, sigma=0.1, grid=6, seed=3)
    assert x.shape == (5, 4)
    assert y.shape == (5, 6, 6, 2)
    x2, y2, _ = trnn.generate("waterdrop", 5, sigma=0.1, grid=6, seed=3)
    assert np.array_equal(y, y2)
    assert meta["generator"] == "waterdrop"
    hx, hy, _ = trnn.generate("helicoid", 4, grid=5, seed=1)
    assert hx.shape == (4, 4, 5)
    assert hy.shape == (4, 2, 5, 5)


def test_gradcheck_passes():
    spec = trnn.default_network_spec([3, 4], [4, 3])
    report = trnn.gradcheck(spec, seed=2)
    assert report["passed"]
    assert report["max_rel_error"] <= 1e-4


def test_model_train_predict_round_trip(tmp_path):
    x, y, _ = trnn.generate("waterdrop", 20, sigma=0.05, grid=4, seed=4)
    model = trnn.Model(trnn.default_network_spec([4], [4, 4, 2]), seed=1)
    report = model.train(x, y, max_epochs=20, batch_size=8, patience=0)
    assert report["epochs_run"] == 20
    assert report["final_loss"] < report["initial_loss"]
    pred = model.predict(x)
    assert pred.shape == y.shape
    model.save(tmp_path / "m")
    back = trnn.Model.load(tmp_path / "m")
    assert back == model
    assert np.array_equal(back.predict(x), pred)


def test_linear_baseline_recovers_linear_map():
    rng = np.random.default_rng(5)
    x = rng.uniform(-1, 1, (60, 5))
    y = x @ rng.uniform(-1, 1, (5, 6))
    pred, count = trnn.fit_predict({"method": "pls", "components": 5}, x, y, x)
    assert count > 0
    assert trnn.rmse(pred, y) < 1e-10


def test_small_benchmark():
    plan = {
        "generator": "waterdrop",
        "n_grid": [12],
        "sigma_grid": [0.1],
        "replications": 2,
        "test_size": 5,
        "grid": 4,
        "base_seed": 1,
        "methods": [{"method": "pls", "components": 2}],
    }
    out = trnn.run_benchmark(plan)
    assert len(out["records"]) == 2
    assert out["summary"]["record_count"] == 2
    again = trnn.run_benchmark(plan)
    assert [r["rmse"] for r in again["records"]] == [r["rmse"] for r in out["records"]]
