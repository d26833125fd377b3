import math

import numpy as np
import pytest

from satmc.features import NUM_FEATURES
from satmc.logistic import (Dataset, LogisticModel, RowProvenance, Standardizer,
                            TrainConfig, accuracy, fit_standardizer, load_model,
                            loss_and_gradient, model_from_text, model_to_text,
                            predict_proba, save_model, train)


def make_dataset(features, labels):
    return Dataset(np.array(features, dtype=float), np.array(labels, dtype=float))


def rand_dataset(rng, n_rows):
    x = rng.normal(size=(n_rows, NUM_FEATURES))
    y = (rng.random(n_rows) < 0.5).astype(float)
    if y.min() == y.max():          # ensure both classes
        y[0] = 1.0 - y[0]
    return Dataset(x, y)


def separable_dataset(n_rows=40):
    x = np.zeros((n_rows, NUM_FEATURES))
    y = np.array([i % 2 for i in range(n_rows)], dtype=float)
    x[:, 0] = y * 2.0 - 1.0
    return Dataset(x, y)


class TestStandardizer:
    def test_two_point_feature(self):
        x = np.zeros((2, NUM_FEATURES))
        x[0, 0], x[1, 0] = 0.0, 2.0
        std = fit_standardizer(make_dataset(x, [0, 1]))
        assert std.mean[0] == pytest.approx(1.0)
        assert std.scale[0] == pytest.approx(1.0)   # population std of {0,2}

    def test_constant_features_get_unit_scale(self):
        x = np.full((5, NUM_FEATURES), 3.25)
        std = fit_standardizer(make_dataset(x, [0, 1, 0, 1, 0]))
        assert np.all(std.scale == 1.0)
        assert np.all(std.mean == 3.25)

    def test_refit_on_standardized_data_is_identity(self):
        rng = np.random.default_rng(0)
        d = rand_dataset(rng, 50)
        std = fit_standardizer(d)
        restd = fit_standardizer(Dataset(std.transform(d.features), d.labels))
        assert np.allclose(restd.mean, 0.0, atol=1e-12)
        assert np.allclose(restd.scale, 1.0, atol=1e-12)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            fit_standardizer(make_dataset(np.zeros((0, NUM_FEATURES)), []))


class TestLossAndGradient:
    def test_zero_params_balanced_loss_is_ln2(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(10, NUM_FEATURES))
        y = np.array([0, 1] * 5, dtype=float)
        d = Dataset(x, y)
        m = LogisticModel(np.zeros(NUM_FEATURES), 0.0, fit_standardizer(d))
        loss, _ = loss_and_gradient(m, d, l2_lambda=0.0)
        assert loss == pytest.approx(math.log(2.0), abs=1e-12)

    def test_single_row_bias_gradient(self):
        x = np.zeros((1, NUM_FEATURES))
        d = make_dataset(x, [1.0])
        m = LogisticModel(np.zeros(NUM_FEATURES), 0.0,
                          Standardizer(np.zeros(NUM_FEATURES), np.ones(NUM_FEATURES)))
        _, grad = loss_and_gradient(m, d)
        assert grad[NUM_FEATURES] == pytest.approx(-0.5)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        h = 1e-5
        for trial in range(20):
            d = rand_dataset(rng, 12)
            std = fit_standardizer(d)
            w = rng.normal(size=NUM_FEATURES)
            b = float(rng.normal())
            lam = float(rng.random() * 0.01)
            m = LogisticModel(w, b, std)
            _, grad = loss_and_gradient(m, d, lam)
            for k in range(NUM_FEATURES + 1):
                def loss_at(delta, k=k):
                    w2, b2 = w.copy(), b
                    if k < NUM_FEATURES:
                        w2[k] += delta
                    else:
                        b2 += delta
                    return loss_and_gradient(LogisticModel(w2, b2, std), d, lam)[0]
                fd = (loss_at(h) - loss_at(-h)) / (2 * h)
                assert grad[k] == pytest.approx(fd, rel=1e-5, abs=1e-7)


class TestTrain:
    def test_separable_data_fits_perfectly(self):
        d = separable_dataset()
        model = train(d, TrainConfig(epochs=500))
        assert accuracy(model, d) == 1.0

    def test_deterministic_bits(self):
        d = separable_dataset()
        a = train(d, TrainConfig(epochs=200))
        b = train(d, TrainConfig(epochs=200))
        assert a.weights.tobytes() == b.weights.tobytes()
        assert a.bias == b.bias
        assert model_to_text(a) == model_to_text(b)

    def test_heavy_regularization_shrinks_weights(self):
        rng = np.random.default_rng(3)
        d = rand_dataset(rng, 60)
        free = train(d, TrainConfig(epochs=300, l2_lambda=0.0))
        shrunk = train(d, TrainConfig(epochs=300, l2_lambda=1e6))
        assert np.linalg.norm(shrunk.weights) < 1e-3
        assert np.linalg.norm(shrunk.weights) < np.linalg.norm(free.weights)

    def test_loss_history_non_increasing(self):
        rng = np.random.default_rng(5)
        d = rand_dataset(rng, 80)
        history = []
        train(d, TrainConfig(epochs=150), history=history)
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))

    def test_single_class_rejected(self):
        x = np.zeros((4, NUM_FEATURES))
        with pytest.raises(ValueError):
            train(make_dataset(x, [1, 1, 1, 1]))


class TestPredict:
    def test_zero_model_gives_half(self):
        m = LogisticModel(np.zeros(NUM_FEATURES), 0.0,
                          Standardizer(np.zeros(NUM_FEATURES), np.ones(NUM_FEATURES)))
        assert predict_proba(m, np.zeros(NUM_FEATURES)) == pytest.approx(0.5)

    def test_trained_model_confident_on_positive_point(self):
        model = train(separable_dataset(), TrainConfig(epochs=500))
        x = np.zeros(NUM_FEATURES)
        x[0] = 1.0
        assert predict_proba(model, x) > 0.9

    def test_negating_parameters_flips_probability(self):
        rng = np.random.default_rng(11)
        std = Standardizer(np.zeros(NUM_FEATURES), np.ones(NUM_FEATURES))
        w = rng.normal(size=NUM_FEATURES)
        m = LogisticModel(w, 0.3, std)
        flipped = LogisticModel(-w, -0.3, std)
        for _ in range(10):
            x = rng.normal(size=NUM_FEATURES)
            assert predict_proba(flipped, x) == pytest.approx(
                1.0 - predict_proba(m, x), abs=1e-12)

    def test_open_interval_even_for_huge_logits(self):
        std = Standardizer(np.zeros(NUM_FEATURES), np.ones(NUM_FEATURES))
        m = LogisticModel(np.full(NUM_FEATURES, 100.0), 0.0, std)
        x = np.full(NUM_FEATURES, 1.0)       # z = 1000
        p = predict_proba(m, x)
        assert 0.0 < p < 1.0
        assert 0.0 < predict_proba(m, -x) < 1.0

    def test_nonfinite_features_rejected(self):
        m = LogisticModel(np.zeros(NUM_FEATURES), 0.0,
                          Standardizer(np.zeros(NUM_FEATURES), np.ones(NUM_FEATURES)))
        bad = np.zeros(NUM_FEATURES)
        bad[3] = float("nan")
        with pytest.raises(ValueError):
            predict_proba(m, bad)

    def test_prediction_invariant_to_feature_rescaling(self):
        # rescaling a raw feature and refitting the standardizer leaves the
        # standardized values, and hence predictions, unchanged
        rng = np.random.default_rng(13)
        d = rand_dataset(rng, 50)
        scaled = Dataset(d.features * np.linspace(1, 10, NUM_FEATURES), d.labels)
        a = train(d, TrainConfig(epochs=100))
        b = train(scaled, TrainConfig(epochs=100))
        for i in range(5):
            pa = predict_proba(a, d.features[i])
            pb = predict_proba(b, scaled.features[i])
            assert pa == pytest.approx(pb, rel=1e-9)


class TestModelFile:
    def test_round_trip(self, tmp_path):
        model = train(separable_dataset(), TrainConfig(epochs=100),
                      metadata={"note": "round trip"})
        path = str(tmp_path / "model.txt")
        save_model(model, path)
        back = load_model(path)
        assert np.array_equal(back.weights, model.weights)
        assert back.bias == model.bias
        assert np.array_equal(back.standardizer.mean, model.standardizer.mean)
        assert np.array_equal(back.standardizer.scale, model.standardizer.scale)
        assert back.metadata["note"] == "round trip"

    def test_incomplete_file_rejected(self):
        with pytest.raises(ValueError):
            model_from_text("version 1\nbias 0.0\n")

    def test_unknown_version_rejected(self):
        model = train(separable_dataset(), TrainConfig(epochs=50))
        text = model_to_text(model).replace("version 1", "version 9")
        with pytest.raises(ValueError):
            model_from_text(text)
