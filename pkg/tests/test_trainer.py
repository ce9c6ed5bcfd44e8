import numpy as np
import pytest

from frele.errors import ConfigError, NoData, ShapeMismatch
from frele.loss import FreLEConfig
from frele.models import LinearForecaster, init_linear, with_params
from frele.rng import XorShift64Star
from frele.spectral import band_partition
from frele.timeseries import MultiSeries, Windows, fit_apply_scaler, stack_windows
from frele.trainer import AdamState, TrainConfig, adam_step, evaluate, train


def linear_data(n, T=8, S=4, C=2, seed=0):
    """Windows whose targets are an exact linear function of the inputs."""
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(S, T)) / T
    b = rng.normal(size=S)
    x = rng.normal(size=(n, T, C))
    y = W @ x + b[:, None]
    return Windows(x, y, np.arange(n))


def small_model(seed=0, T=8, S=4, C=2):
    return init_linear(T, S, C, XorShift64Star(seed), mode="plain")


class TestAdam:
    def test_first_step(self):
        p = {"w": np.array([0.5, -2.0])}
        state = AdamState.zeros_like(p, lr=0.01)
        state, new = adam_step(state, p, {"w": np.ones(2)})
        np.testing.assert_allclose(new["w"] - p["w"], -0.01 / (1 + 1e-8), rtol=1e-12)
        assert state.step == 1

    def test_zero_gradient(self):
        p = {"w": np.arange(4.0)}
        state = AdamState.zeros_like(p, lr=0.1)
        for _ in range(20):
            state, p = adam_step(state, p, {"w": np.zeros(4)})
        np.testing.assert_array_equal(p["w"], np.arange(4.0))

    def test_matches_reference(self, rng):
        # Reference: textbook Adam written out independently.
        p0 = rng.normal(size=5)
        grads = rng.normal(size=(10, 5))
        m = v = np.zeros(5)
        ref = p0.copy()
        for t, g in enumerate(grads, 1):
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            ref = ref - 0.003 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
        state, p = AdamState.zeros_like({"w": p0}, lr=0.003), {"w": p0}
        for g in grads:
            state, p = adam_step(state, p, {"w": g})
        np.testing.assert_allclose(p["w"], ref, rtol=1e-13)

    def test_inputs_untouched(self):
        p = {"w": np.ones(3)}
        state = AdamState.zeros_like(p)
        adam_step(state, p, {"w": np.ones(3)})
        np.testing.assert_array_equal(p["w"], 1.0)
        np.testing.assert_array_equal(state.m["w"], 0.0)

    def test_shape_mismatch(self):
        p = {"w": np.ones(3)}
        with pytest.raises(ShapeMismatch):
            adam_step(AdamState.zeros_like(p), p, {"w": np.ones(4)})
        with pytest.raises(ShapeMismatch):
            adam_step(AdamState.zeros_like(p), p, {"v": np.ones(3)})


class TestTrainConfig:
    @pytest.mark.parametrize("kw", [{"epochs": 0}, {"batch_size": 0}, {"lr": -1.0}, {"patience": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            TrainConfig(**kw)


class TestTrain:
    def test_realizable(self):
        # train and validation windows come from the same linear map
        data = linear_data(320, seed=1)
        tr, va = data.take(np.arange(256)), data.take(np.arange(256, 320))
        cfg = TrainConfig(epochs=200, batch_size=32, lr=0.01, patience=200, seed=0)
        model, logs = train(small_model(), tr, va, FreLEConfig(delta=0.0), cfg)
        assert len(logs) <= 200
        assert evaluate(model, tr)["mse"] < 1e-6

    def test_stalled_stops(self):
        tr = linear_data(64)
        cfg = TrainConfig(epochs=30, lr=0.0, patience=1)
        model, logs = train(small_model(), tr, tr, FreLEConfig(), cfg)
        assert len(logs) == 2

    def test_deterministic(self):
        tr, va = linear_data(100, seed=2), linear_data(40, seed=3)
        cfg = TrainConfig(epochs=5, batch_size=16, lr=0.01, seed=4)
        m1, l1 = train(small_model(1), tr, va, FreLEConfig(), cfg)
        m2, l2 = train(small_model(1), tr, va, FreLEConfig(), cfg)
        for k in m1.params:
            np.testing.assert_array_equal(m1.params[k], m2.params[k])
        assert [(x.epoch, x.train, x.val) for x in l1] == [(x.epoch, x.train, x.val) for x in l2]

    def test_returns_best(self):
        tr, va = linear_data(100, seed=2), linear_data(40, seed=3)
        cfg = TrainConfig(epochs=12, batch_size=8, lr=0.2, patience=3, seed=0)
        model, logs = train(small_model(), tr, va, FreLEConfig(delta=0.5), cfg)
        best = min(x.val.combined for x in logs)
        from frele.trainer import _loss_over, _prepare

        got = _loss_over(model, _prepare(va, FreLEConfig(delta=0.5)), FreLEConfig(delta=0.5)).combined
        assert got == pytest.approx(best, rel=1e-12)
        assert [x.epoch for x in logs] == list(range(len(logs)))

    def test_delta_zero_is_time_loss(self):
        # delta = 0 must follow exactly the trajectory of plain MSE training.
        tr, va = linear_data(64, seed=5), linear_data(16, seed=6)
        cfg = TrainConfig(epochs=4, batch_size=16, lr=0.01, seed=1)
        m_frele, _ = train(small_model(2), tr, va, FreLEConfig(delta=0.0, d=3, implicit_enabled=True), cfg)

        params = {k: v.copy() for k, v in small_model(2).params.items()}
        model = small_model(2)
        state = AdamState.zeros_like(params, lr=0.01)
        rng = XorShift64Star(1)
        for _ in range(4):
            order = rng.permutation(64)
            for s in range(0, 64, 16):
                idx = order[s : s + 16]
                cur = with_params(model, params)
                pred = cur.predict(tr.inputs[idx])
                g = 2 * (pred - tr.targets[idx]) / pred.size
                state, params = adam_step(state, params, cur.gradients(tr.inputs[idx], g))
        for k in params:
            np.testing.assert_array_equal(m_frele.params[k], params[k])

    def test_band_logging(self):
        tr, va = linear_data(32, S=6), linear_data(16, S=6)
        m = init_linear(8, 6, 2, XorShift64Star(0), mode="plain")
        _, logs = train(m, tr, va, FreLEConfig(), TrainConfig(epochs=2), partition=band_partition(4))
        assert all(x.val_bands is not None for x in logs)

    def test_empty(self):
        tr = linear_data(8)
        with pytest.raises(NoData):
            train(small_model(), tr, tr.take(np.arange(0)), FreLEConfig(), TrainConfig())


class TestEvaluate:
    def test_perfect(self):
        w = linear_data(20)
        m = LinearForecaster(8, 4, 2, mode="plain")
        rng = np.random.default_rng(0)
        W = rng.normal(size=(4, 8)) / 8
        b = rng.normal(size=4)
        m.params = {"weight": W[None], "bias": b[None]}
        assert evaluate(m, w) == {"mse": 0.0, "mae": 0.0}

    def test_zero_prediction_on_standardized(self):
        n = 20000
        rng = XorShift64Star(11)
        s = MultiSeries(rng.normal(n * 2).reshape(2, n) * 3 + 7, ("a", "b"))
        (z,), _ = fit_apply_scaler(s)
        w = stack_windows(z, 8, 4, stride=4)
        m = LinearForecaster(8, 4, 2, mode="plain")
        m.params = {"weight": np.zeros((1, 4, 8)), "bias": np.zeros((1, 4))}
        assert evaluate(m, w)["mse"] == pytest.approx(1.0, abs=0.03)

    def test_empty(self):
        with pytest.raises(NoData):
            evaluate(small_model(), linear_data(4).take(np.arange(0)))
