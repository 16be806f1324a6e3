"""SVR, stacking, the scaled pipeline and model persistence."""

import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slotmini import dataset
from slotmini.metrics import metric_panel
from slotmini.models import (
    BaseConfigs,
    ForestConfig,
    GbtConfig,
    MinMaxScaler,
    ScaledModel,
    SurrogateSuite,
    SvrConfig,
    SvrConvergenceError,
    fit_forest,
    fit_gbt,
    fit_meta,
    fit_stacked,
    fit_svr,
    load_model,
    predict,
    save_model,
)
from slotmini.models import persistence

import oracles

SMALL = BaseConfigs(forest=ForestConfig(n_trees=15), gbt=GbtConfig(n_rounds=40), seed=2)


def small_data(n=60, seed=0):
    r = np.random.default_rng(seed)
    X = r.random((n, 2))
    return X, 1.4 + 0.3 * np.sin(3 * X[:, 1]) + 0.05 * X[:, 0]


class TestSvr:
    def test_constant_targets(self):
        X = np.random.default_rng(0).random((12, 2))
        model = fit_svr(X, np.full(12, 1.7))
        assert np.all(model.coef == 0)
        assert model.bias == pytest.approx(1.7, abs=1e-12)
        assert model.predict(X) == pytest.approx(np.full(12, 1.7))

    @pytest.mark.parametrize(
        "X,y,C,eps,gamma",
        [
            ([[0.0], [0.5], [1.0]], [0.0, 1.0, 0.2], 10.0, 0.1, 1.0),
            ([[0.0, 0.0], [0.3, 0.8], [0.9, 0.1], [0.6, 0.6]], [1.4, 1.9, 1.5, 1.6], 10.0, 0.01, 2.0),
        ],
    )
    def test_matches_dense_qp(self, X, y, C, eps, gamma):
        model = fit_svr(X, y, SvrConfig(C=C, epsilon=eps, gamma=gamma, tol=1e-9))
        coef, bias = oracles.svr_dual_qp(X, y, C, eps, gamma)
        assert model.coef == pytest.approx(coef, abs=1e-4)
        assert model.bias == pytest.approx(bias, abs=1e-4)

    def test_random_problem_matches_dense_qp(self):
        X, y = small_data(25, seed=4)
        cfg = SvrConfig(C=1.0, epsilon=0.01, gamma=2.0, tol=1e-8)
        model = fit_svr(X, y, cfg)
        coef, bias = oracles.svr_dual_qp(X, y, cfg.C, cfg.epsilon, cfg.gamma)
        grid = np.random.default_rng(9).random((40, 2))
        K = oracles_kernel(grid, X, cfg.gamma)
        assert model.predict(grid) == pytest.approx(K @ coef + bias, abs=1e-4)

    def test_duplicate_rows_do_not_change_fit(self):
        X = np.array([[0.1, 0.2], [0.5, 0.9], [0.8, 0.3], [0.3, 0.6]])
        y = np.array([1.5, 1.9, 1.4, 1.7])
        cfg = SvrConfig(C=1e6, epsilon=0.01, gamma=2.0, tol=1e-10)
        a = fit_svr(X, y, cfg)
        b = fit_svr(np.vstack([X, X[:1]]), np.append(y, y[0]), cfg)
        grid = np.random.default_rng(1).random((20, 2))
        assert b.predict(grid) == pytest.approx(a.predict(grid), abs=1e-6)

    def test_box_and_kkt(self, noiseless_scaled):
        Xs, y = noiseless_scaled
        cfg = SvrConfig()
        model = fit_svr(Xs, y, cfg)
        assert np.all(np.abs(model.coef) <= cfg.C + 1e-12)
        assert abs(model.coef.sum()) < 1e-8
        assert model.kkt_violation <= cfg.tol
        # points strictly inside the tube carry no weight
        resid = np.abs(y - model.predict(Xs))
        assert np.all(model.coef[resid < cfg.epsilon - 1e-3] == 0)

    def test_convergence_error(self, noiseless_scaled):
        Xs, y = noiseless_scaled
        with pytest.raises(SvrConvergenceError) as info:
            fit_svr(Xs, y, SvrConfig(max_passes=1, tol=1e-12))
        assert info.value.kkt_violation > 1e-12
        assert info.value.n_iter > 0

    @pytest.mark.parametrize("kw", [{"C": 0.0}, {"gamma": -1.0}, {"epsilon": -0.1}, {"tol": 0.0}])
    def test_bad_config(self, kw):
        with pytest.raises(ValueError):
            SvrConfig(**kw)


def oracles_kernel(A, B, gamma):
    return np.exp(-gamma * ((A[:, None, :] - B[None, :, :]) ** 2).sum(-1))


class TestMeta:
    def test_exact_weights(self):
        P = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])
        y = 0.5 + P[:, 0] + 2 * P[:, 1] - P[:, 2]
        meta = fit_meta(P, y)
        assert not meta.fallback
        assert meta.intercept == pytest.approx(0.5, abs=1e-12)
        assert meta.weights == pytest.approx([1.0, 2.0, -1.0], abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_normal_equations(self, seed):
        r = np.random.default_rng(seed)
        P = r.random((12, 3))
        y = r.random(12)
        meta = fit_meta(P, y)
        A = np.column_stack([np.ones(12), P])
        coef = np.linalg.solve(A.T @ A, A.T @ y)
        assert np.append(meta.intercept, meta.weights) == pytest.approx(coef, abs=1e-8)

    def test_identical_columns_fall_back(self, caplog):
        p = np.linspace(1.4, 1.9, 10)
        with caplog.at_level(logging.WARNING):
            meta = fit_meta(np.column_stack([p, p, p]), p + 0.01)
        assert meta.fallback
        assert meta.weights == pytest.approx([1 / 3] * 3)
        assert meta.intercept == 0.0
        assert meta.predict(np.column_stack([p, p, p])) == pytest.approx(p, abs=1e-14)
        assert "rank" in caplog.text


class TestStacked:
    def test_identical_bases_predict_like_one(self):
        X, y = small_data()
        tree_model = fit_forest(X, y, ForestConfig(n_trees=5), seed=0)
        bases = {"forest": tree_model, "svr": tree_model, "gbt": tree_model}
        stack = fit_stacked(X, y, bases=bases)
        assert stack.meta.fallback
        assert stack.predict(X) == pytest.approx(tree_model.predict(X), abs=1e-12)

    def test_in_sample_mode_not_worse(self):
        X, y = small_data(120)
        stack = fit_stacked(X, y, SMALL, mode="paper")
        mse = {n: np.mean((m.predict(X) - y) ** 2) for n, m in stack.bases.items()}
        assert np.mean((stack.predict(X) - y) ** 2) <= min(mse.values()) + 1e-12

    def test_out_of_fold_mode(self):
        X, y = small_data(120)
        stack = fit_stacked(X, y, SMALL, mode="out_of_fold")
        assert stack.mode == "out_of_fold"
        assert stack.base_names == ("forest", "svr", "gbt")
        assert metric_panel(y, stack.predict(X)).r2 > 0.9

    def test_subset_of_bases(self):
        X, y = small_data()
        stack = fit_stacked(X, y, SMALL, names=("forest", "gbt"))
        assert stack.meta.weights.size == 2

    def test_unknown_mode(self):
        X, y = small_data()
        with pytest.raises(ValueError):
            fit_stacked(X, y, SMALL, mode="blend")


class TestScaler:
    def test_extrema(self):
        X = np.array([[1.3, 2.1], [5.0, 12.0], [3.0, 7.0]])
        s = MinMaxScaler.fit(X)
        Z = s.transform(X)
        assert Z.min(axis=0).tolist() == [0.0, 0.0]
        assert Z.max(axis=0).tolist() == [1.0, 1.0]

    def test_constant_column(self):
        s = MinMaxScaler.fit([[1.0, 2.0], [1.0, 3.0]])
        assert np.all(np.isfinite(s.transform([[1.0, 2.5], [2.0, 2.5]])))

    def test_bound_to_training_split(self, noiseless_suite, noiseless_split):
        X = dataset.features(noiseless_split.train)
        assert np.array_equal(noiseless_suite.scaler.data_min, X.min(axis=0))
        assert np.array_equal(noiseless_suite.scaler.data_max, X.max(axis=0))


class TestPipeline:
    def test_empty_input(self, noiseless_suite):
        for m in noiseless_suite.models.values():
            assert predict(m, np.zeros((0, 2))).shape == (0,)

    def test_optimum_geometry_is_plausible(self, noiseless_suite):
        for m in noiseless_suite.models.values():
            (f,) = predict(m, [[6.2441, 11.8614]])
            assert 1.0 < f < 2.5

    def test_unscaled_input_rejected_by_bare_model(self, noiseless_suite):
        bare = noiseless_suite.models["forest"].model
        with pytest.raises(ValueError, match="unscaled"):
            predict(bare, [[6.2441, 11.8614]])
        assert predict(bare, [[0.5, 0.5]]).shape == (1,)

    def test_suite_has_all_models(self, noiseless_suite):
        assert set(noiseless_suite.models) == {"forest", "svr", "gbt", "stacked"}
        assert not noiseless_suite.failures

    def test_svr_failure_is_reported_and_stack_continues(self):
        X, y = small_data(80)
        X = 1.2 + 10 * X
        cfg = BaseConfigs(
            forest=ForestConfig(n_trees=5), svr=SvrConfig(max_passes=1, tol=1e-12), gbt=GbtConfig(n_rounds=10)
        )
        suite = SurrogateSuite.fit(X, y, cfg)
        assert "svr" in suite.failures
        assert "svr" not in suite.models
        assert suite.models["stacked"].model.base_names == ("forest", "gbt")

    def test_noisy_validation_shows_stack_overfit(self, noisy_suite, noisy_split):
        # in-sample stacking fits the training noise; on validation it does
        # not beat the smoothest base model
        Xv, yv = dataset.features(noisy_split.validation), dataset.targets(noisy_split.validation)
        r2 = {k: metric_panel(yv, m.predict(Xv)).r2 for k, m in noisy_suite.models.items()}
        Xt, yt = dataset.features(noisy_split.train), dataset.targets(noisy_split.train)
        train_r2 = metric_panel(yt, noisy_suite.models["stacked"].predict(Xt)).r2
        assert train_r2 > r2["stacked"]
        assert r2["stacked"] < max(r2[k] for k in ("forest", "svr", "gbt"))


class TestPersistence:
    @pytest.mark.parametrize("key", ["forest", "svr", "gbt", "stacked"])
    def test_round_trip(self, noiseless_suite, noisy_split, tmp_path, key):
        model = noiseless_suite.models[key]
        path = tmp_path / f"{key}.json"
        save_model(model, path)
        loaded = load_model(path)
        X = dataset.features(noisy_split.test + noisy_split.validation)
        assert loaded.predict(X) == pytest.approx(model.predict(X), rel=1e-12)
        assert isinstance(loaded, ScaledModel)

    def test_bare_tree_model(self):
        X, y = small_data()
        model = fit_gbt(X, y, GbtConfig(n_rounds=5))
        again = persistence.loads(persistence.dumps(model))
        assert np.array_equal(again.predict(X), model.predict(X))

    def test_rejects_foreign_files(self):
        with pytest.raises(persistence.PersistenceError):
            persistence.loads(json.dumps({"format": "other", "version": 1, "model": {}}))
        with pytest.raises(persistence.PersistenceError):
            persistence.loads(json.dumps({"format": persistence.FORMAT, "version": 99, "model": {}}))
