from dataclasses import replace

import numpy as np
import pytest

from rssi_fcnn.chansim import ChannelParams, simulate_stationary_trace
from rssi_fcnn.data import RssiTrace, WindowedDataset, make_windows, temporal_split, with_normalizer
from rssi_fcnn.errors import ConfigError, DataError, NumericError, ShapeError
from rssi_fcnn.evaluation import Persistence, run_baseline
from rssi_fcnn.models import (
    ModelConfig,
    build_model,
    evaluate,
    predict,
    prepare_model_a,
    prepare_model_b,
    train,
    with_epochs,
)
from rssi_fcnn.nn import Activation, param_count
from rssi_fcnn.optim import NadamHyper


def small_split(n=120, window=10, seed=0, normalize=True):
    tr = simulate_stationary_trace(ChannelParams(seed=seed), 3.0, n)
    split = temporal_split(make_windows(tr, window), 0.8)
    return with_normalizer(split) if normalize else split


class TestConfig:
    def test_variant_defaults(self):
        a, b = ModelConfig("A"), ModelConfig("b")
        assert (a.window, a.epochs, a.hidden) == (10, 200, 10)
        assert (b.variant, b.window, b.epochs) == ("B", 2, 300)
        assert a.normalize and b.normalize

    def test_fixed_settings_need_override(self):
        with pytest.raises(ConfigError):
            ModelConfig("A", epochs=10)
        with pytest.raises(ConfigError):
            ModelConfig("B", window=3)
        with pytest.raises(ConfigError):
            ModelConfig("A", hidden=12)
        cfg = ModelConfig("A", epochs=10, override=True)
        assert cfg.epochs == 10
        with pytest.raises(ConfigError):
            ModelConfig("C")

    def test_dict_round_trip(self):
        cfg = ModelConfig("B", seed=4, hyper=NadamHyper(eta=0.01))
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg


class TestBuild:
    def test_param_counts(self):
        assert param_count(build_model(ModelConfig("A"))) == 231
        assert param_count(build_model(ModelConfig("B"))) == 151

    def test_layout(self):
        net = build_model(ModelConfig("B"))
        assert [(s.in_dim, s.out_dim) for s in net.specs] == [(2, 10), (10, 10), (10, 1)]
        assert net.specs[-1].activation is Activation.IDENTITY

    def test_seeded(self):
        assert build_model(ModelConfig("A", seed=3)) == build_model(ModelConfig("A", seed=3))
        assert build_model(ModelConfig("A", seed=3)) != build_model(ModelConfig("A", seed=4))


class TestTrain:
    def test_engines_agree(self):
        split = small_split()
        cfg = with_epochs(ModelConfig("A", seed=1, hyper=NadamHyper(eta=1e-3)), 3)
        fast, h_fast = train(cfg, split, engine="compiled")
        ref, h_ref = train(cfg, split, engine="numpy")
        np.testing.assert_allclose(fast.params, ref.params, rtol=0, atol=1e-12)
        np.testing.assert_allclose(h_fast.train_mse, h_ref.train_mse, rtol=1e-10)

    def test_zero_epochs_returns_initial_network(self):
        cfg = with_epochs(ModelConfig("A", seed=2), 0)
        net, hist = train(cfg, small_split())
        assert net == build_model(cfg)
        assert hist.train_mse == []

    def test_one_history_entry_per_epoch(self):
        cfg = with_epochs(ModelConfig("A", seed=0), 7)
        _, hist = train(cfg, small_split())
        assert len(hist.train_mse) == 7 and np.all(np.isfinite(hist.train_mse))
        assert hist.test_mse is not None and hist.test_rmse == pytest.approx(np.sqrt(hist.test_mse))

    @pytest.mark.parametrize("variant", ["A", "B"])
    def test_constant_series_learned(self, variant):
        cfg = ModelConfig(variant, seed=0)
        split = with_normalizer(temporal_split(make_windows(RssiTrace(np.full(60, -50.0)), cfg.window), 0.8))
        _, hist = train(cfg, split)
        assert hist.train_mse[-1] <= 1e-3

    def test_reproducible(self):
        cfg = with_epochs(ModelConfig("A", seed=5), 5)
        split = small_split(300)
        a, ha = train(cfg, split)
        b, hb = train(cfg, split)
        assert a.params.tobytes() == b.params.tobytes()
        assert ha.train_mse == hb.train_mse

    def test_order_matters(self):
        # the loop is sequential: reversing the pairs changes the result
        cfg = with_epochs(ModelConfig("A", seed=5), 2)
        split = small_split(300)
        tr = split.train
        rev = replace(split, train=WindowedDataset(tr.window, tr.inputs[::-1], tr.targets[::-1]))
        assert train(cfg, split)[0] != train(cfg, rev)[0]

    def test_input_errors(self):
        split = small_split()
        with pytest.raises(ShapeError):
            train(ModelConfig("B"), split)
        with pytest.raises(ConfigError):
            train(ModelConfig("A", normalize=False), split)
        with pytest.raises(ConfigError):
            train(ModelConfig("A"), split, engine="gpu")
        empty = replace(split, train=split.train.slice(0, 0))
        with pytest.raises(DataError):
            train(ModelConfig("A"), empty)

    def test_divergence_reported(self):
        cfg = with_epochs(ModelConfig("A", seed=0, normalize=False, hyper=NadamHyper(eta=1e6)), 50)
        tr = RssiTrace(np.random.default_rng(0).normal(-60, 1e200, 200))
        split = temporal_split(make_windows(tr, 10), 0.8)
        with pytest.raises(NumericError, match="epoch"):
            train(cfg, split)


class TestEvaluate:
    def test_metrics_fields(self):
        cfg = with_epochs(ModelConfig("A", seed=0), 2)
        split = small_split()
        net, _ = train(cfg, split)
        m = evaluate(net, split)
        assert m.n_pairs == len(split.test) and m.param_count == 231
        assert m.rmse**2 == pytest.approx(m.mse, rel=1e-12)
        preds = predict(net, split)
        assert m.mse == pytest.approx(np.mean((preds - split.test.targets) ** 2), rel=1e-14)

    def test_empty_test(self):
        split = small_split()
        split = replace(split, test=split.test.slice(0, 0))
        with pytest.raises(DataError):
            evaluate(build_model(ModelConfig("A")), split)


def test_model_b_split_counts():
    cfg = ModelConfig("B")
    split = prepare_model_b(RssiTrace(np.linspace(-50, -60, 11)), cfg)
    assert len(split.train) == 6 and len(split.test) == 2
    np.testing.assert_allclose(split.test.targets, np.linspace(-50, -60, 11)[8:10])


def test_model_a_learns_on_synthetic_trace():
    # short run, but the same direction as the full acceptance check
    cfg = with_epochs(ModelConfig("A", seed=0), 20)
    tr = simulate_stationary_trace(ChannelParams.preset("los", seed=0), 3.0, 3000)
    split = prepare_model_a(tr, cfg)
    net, hist = train(cfg, split)
    assert hist.train_mse[-1] <= 0.5 * hist.train_mse[0]
    assert evaluate(net, split).mse <= 2 * run_baseline(Persistence(), split).mse
