import numpy as np
import pytest

from mbpkit import gbr
from mbpkit._rng import make_rng


def _dataset(n_rows=40, n_features=3, seed=0, fn=None):
    rng = make_rng(seed)
    x = rng.random((n_rows, n_features))
    if fn is None:
        y = rng.random(n_rows)
    else:
        y = fn(x)
    return gbr.Dataset(x, y)


class TestTree:
    def test_constant_residuals_single_leaf(self):
        ds = _dataset(20, seed=1)
        tree = gbr.fit_tree(ds, np.full(20, 3.5), max_depth=4, min_samples_leaf=1)
        assert tree.root.is_leaf
        assert tree.root.value == 3.5

    def test_step_function_split_found(self):
        x = np.arange(10, dtype=float).reshape(-1, 1)
        y = np.where(x[:, 0] < 5, -1.0, 1.0)
        ds = gbr.Dataset(x, y)
        tree = gbr.fit_tree(ds, y, max_depth=1, min_samples_leaf=1)
        assert not tree.root.is_leaf
        assert tree.root.threshold == 4.5
        assert tree.root.left.value == -1.0
        assert tree.root.right.value == 1.0

    def test_min_samples_equal_to_n_gives_single_leaf(self):
        ds = _dataset(15, seed=2)
        tree = gbr.fit_tree(ds, ds.targets, max_depth=5, min_samples_leaf=15)
        assert tree.root.is_leaf
        assert tree.root.value == pytest.approx(ds.targets.mean())

    def test_depth_respected(self):
        ds = _dataset(60, seed=3)
        for depth in (0, 1, 2, 3):
            tree = gbr.fit_tree(ds, ds.targets, max_depth=depth, min_samples_leaf=1)
            assert tree.depth() <= depth

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            gbr.Dataset(np.zeros((0, 3)), np.zeros(0))


class TestBoosting:
    def test_zero_learning_rate_predicts_mean(self):
        ds = _dataset(25, seed=4)
        model = gbr.fit_gbr(ds, gbr.GbrParams(n_trees=10, learning_rate=0.0))
        for row in ds.features[:5]:
            assert gbr.predict(model, row) == pytest.approx(ds.targets.mean())

    def test_memorizes_distinct_points(self):
        ds = _dataset(20, seed=5)
        model = gbr.fit_gbr(ds, gbr.GbrParams(n_trees=200, max_depth=6, learning_rate=0.1))
        assert model.train_mse[-1] < 1e-4

    def test_depth_zero_is_mean_predictor(self):
        ds = _dataset(30, seed=6)
        model = gbr.fit_gbr(ds, gbr.GbrParams(n_trees=50, max_depth=0))
        pred = gbr.predict_many(model, ds.features)
        assert np.allclose(pred, ds.targets.mean())

    def test_single_round_depth_zero_equals_mean(self):
        ds = _dataset(10, seed=7)
        model = gbr.fit_gbr(ds, gbr.GbrParams(n_trees=1, max_depth=0))
        assert gbr.predict(model, ds.features[0]) == pytest.approx(ds.targets.mean())

    def test_training_mse_non_increasing(self):
        for seed in range(20):
            ds = _dataset(50, seed=seed)
            model = gbr.fit_gbr(ds, gbr.GbrParams(n_trees=40))
            assert all(b <= a for a, b in zip(model.train_mse, model.train_mse[1:]))

    def test_too_few_samples_rejected(self):
        ds = gbr.Dataset(np.zeros((1, 3)), np.zeros(1))
        with pytest.raises(ValueError):
            gbr.fit_gbr(ds)


class TestPredict:
    def test_arity_mismatch(self):
        ds = _dataset(12, seed=8)
        model = gbr.fit_gbr(ds, gbr.GbrParams(n_trees=5))
        with pytest.raises(ValueError):
            gbr.predict(model, [1.0, 2.0])

    def test_no_trees_returns_init(self):
        ds = _dataset(12, seed=9)
        model = gbr.fit_gbr(ds, gbr.GbrParams(n_trees=0))
        assert gbr.predict(model, ds.features[0]) == model.init_value

    def test_deterministic(self):
        ds = _dataset(30, seed=10)
        a = gbr.fit_gbr(ds)
        b = gbr.fit_gbr(ds)
        row = ds.features[3]
        assert gbr.predict(a, row) == gbr.predict(b, row)


class TestMetrics:
    def test_hand_values(self):
        m = gbr.metrics_from_predictions([1.0, 2.0, 4.0], [1.0, 2.0, 3.0])
        assert m.mae == pytest.approx(1 / 3)
        assert m.rmse == pytest.approx(1 / np.sqrt(3))
        assert m.r2 == pytest.approx(0.5)

    def test_perfect_prediction(self):
        m = gbr.metrics_from_predictions([1.0, 2.0], [1.0, 2.0])
        assert (m.rmse, m.mae, m.r2) == (0.0, 0.0, 1.0)

    def test_constant_mean_predictor_gets_zero_r2(self):
        y = np.array([1.0, 2.0, 3.0])
        m = gbr.metrics_from_predictions(np.full(3, y.mean()), y)
        assert m.r2 == pytest.approx(0.0)

    def test_constant_target_degenerate_cases(self):
        assert gbr.metrics_from_predictions([2.0, 2.0], [2.0, 2.0]).r2 == 1.0
        assert gbr.metrics_from_predictions([2.5, 2.0], [2.0, 2.0]).r2 == 0.0

    def test_mae_never_exceeds_rmse(self):
        rng = make_rng(11)
        for _ in range(30):
            pred = rng.normal(size=17)
            y = rng.normal(size=17)
            m = gbr.metrics_from_predictions(pred, y)
            assert m.mae <= m.rmse + 1e-15


class TestSerialization:
    def test_round_trip_predictions_exact(self, tmp_path):
        ds = _dataset(40, seed=12)
        model = gbr.fit_gbr(ds)
        model.split_seed = 7
        path = tmp_path / "m.txt"
        gbr.save_model(model, path)
        loaded = gbr.load_model(path)
        assert loaded.init_value == model.init_value
        assert loaded.split_seed == 7
        assert loaded.params == model.params
        for row in ds.features:
            assert gbr.predict(loaded, row) == gbr.predict(model, row)

    def test_round_trip_bytes_stable(self, tmp_path):
        ds = _dataset(25, seed=13)
        model = gbr.fit_gbr(ds, gbr.GbrParams(n_trees=7))
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        gbr.save_model(model, a)
        gbr.save_model(gbr.load_model(a), b)
        assert a.read_bytes() == b.read_bytes()

    def test_rejects_unknown_version(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("mbpkit-gbr v999\n")
        with pytest.raises(ValueError):
            gbr.load_model(path)


class _Row:
    def __init__(self, n, density, lambda_est, lambda_min, lambda_max):
        self.n = n
        self.density = density
        self.lambda_est = lambda_est
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max


class TestTrainLambdaModels:
    def _rows(self, count, seed=0, fn=None):
        rng = make_rng(seed)
        rows = []
        for _ in range(count):
            n = int(rng.integers(50, 2001))
            dens = float(rng.uniform(0.05, 0.9))
            est = (1 + min(dens * n, n / 2 - 1)) / 2
            if fn is None:
                lo, hi = sorted(rng.uniform(0.01, 0.4, size=2))
            else:
                lo = hi = fn(n, dens, est)
            rows.append(_Row(n, dens, est, lo, hi))
        return rows

    def test_refuses_small_input(self):
        with pytest.raises(ValueError):
            gbr.train_lambda_models(self._rows(9))

    def test_constant_targets(self):
        rows = [_Row(100 + i, 0.5, 5.0, 0.1, 0.2) for i in range(12)]
        report = gbr.train_lambda_models(rows, split_seed=3)
        g_features = [150.0, 0.5, 5.0]
        assert gbr.predict(report.model_min, g_features) == pytest.approx(0.1)
        assert gbr.predict(report.model_max, g_features) == pytest.approx(0.2)
        assert report.metrics_min.r2 == 1.0  # degenerate-handled

    def test_synthetic_recovery(self):
        rows = self._rows(2000, seed=5, fn=lambda n, d, e: min(max(0.5 / (d * 25), 0.01), 0.4))
        report = gbr.train_lambda_models(rows, split_seed=0)
        assert report.metrics_max.r2 >= 0.95

    def test_split_sizes(self):
        report = gbr.train_lambda_models(self._rows(100), split_seed=0)
        assert report.n_test == 20
        assert report.n_train == 80

    def test_deterministic(self, tmp_path):
        rows = self._rows(30, seed=6)
        a = gbr.train_lambda_models(rows, split_seed=9)
        b = gbr.train_lambda_models(rows, split_seed=9)
        pa, pb = tmp_path / "a.txt", tmp_path / "b.txt"
        gbr.save_model(a.model_min, pa)
        gbr.save_model(b.model_min, pb)
        assert pa.read_bytes() == pb.read_bytes()
        assert a.metrics_max == b.metrics_max
