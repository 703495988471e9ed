import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rssi_fcnn.errors import ConfigError, NumericError, ShapeError
from rssi_fcnn.nn import Activation, Gradients, LayerSpec, Network, init_weights, mlp_specs
from rssi_fcnn.optim import (
    NadamHyper,
    NadamState,
    nadam_step,
    relative_error,
    sgd_step,
)


def scalar_nadam(w, grads, eta=0.002, b1=0.9, b2=0.999, eps=1e-8):
    """Reference recurrence, one parameter at a time with Python floats."""
    m = v = 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * (g * g)
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        w = w - eta / (math.sqrt(v_hat) + eps) * (b1 * m_hat + (1 - b1) * g / (1 - b1**t))
        out.append(w)
    return out


def three_param_net(w):
    return Network([LayerSpec(2, 1, Activation.IDENTITY)], w)


def grads_for(net, values):
    return Gradients(net, np.array(values, dtype=np.float64))


class TestNadam:
    def test_zero_gradient_fixed_point(self):
        net = init_weights(mlp_specs([3, 4, 1]), 0)
        before = net.params.copy()
        state = NadamState.zeros(net)
        nadam_step(net, Gradients(net), state)
        np.testing.assert_array_equal(net.params, before)
        assert state.t == 1

    def test_first_step_hand_iterated(self):
        # m=0.05, m_hat=0.5, v=0.00025, v_hat=0.25 -> -0.002/0.5 * (0.45 + 0.5)
        net = Network([LayerSpec(1, 1, Activation.IDENTITY)], [0.0, 0.0])
        state = NadamState.zeros(net)
        nadam_step(net, grads_for(net, [0.5, 0.0]), state)
        assert state.m[0] == pytest.approx(0.05, rel=1e-15)
        assert state.v[0] == pytest.approx(0.00025, rel=1e-15)
        assert net.params[0] == pytest.approx(-0.0038, abs=1e-10)

    def test_two_steps_match_scalar_reference(self):
        net = Network([LayerSpec(1, 1, Activation.IDENTITY)], [0.3, 0.0])
        state = NadamState.zeros(net)
        for _ in range(2):
            nadam_step(net, grads_for(net, [0.5, 0.0]), state)
        assert abs(net.params[0] - scalar_nadam(0.3, [0.5, 0.5])[-1]) <= 1e-15

    def test_hundred_random_steps(self):
        rng = np.random.default_rng(7)
        w0 = rng.standard_normal(3)
        script = rng.standard_normal((100, 3)) * rng.uniform(1e-3, 10, size=(100, 1))
        net = three_param_net(w0)
        state = NadamState.zeros(net)
        for g in script:
            nadam_step(net, grads_for(net, g), state)
        for k in range(3):
            ref = scalar_nadam(w0[k], script[:, k])[-1]
            assert abs(net.params[k] - ref) <= 1e-15
        assert state.t == 100

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=1, max_size=30))
    def test_second_moment_nonnegative(self, seq):
        net = Network([LayerSpec(1, 1, Activation.IDENTITY)], [0.0, 0.0])
        state = NadamState.zeros(net)
        for g in seq:
            nadam_step(net, grads_for(net, [g, -g]), state)
            assert np.all(state.v >= 0)

    @given(st.floats(1e-6, 1e6))
    def test_first_step_bounded(self, g):
        net = Network([LayerSpec(1, 1, Activation.IDENTITY)], [0.0, 0.0])
        nadam_step(net, grads_for(net, [g, g]), NadamState.zeros(net))
        assert np.all(np.abs(net.params) <= 2 * 0.002)

    def test_shape_mismatch(self):
        a = init_weights(mlp_specs([3, 4, 1]), 0)
        b = init_weights(mlp_specs([3, 5, 1]), 0)
        with pytest.raises(ShapeError):
            nadam_step(a, Gradients(b), NadamState.zeros(a))
        with pytest.raises(ShapeError):
            nadam_step(a, Gradients(a), NadamState.zeros(b))

    def test_non_finite_gradient_names_layer(self):
        net = init_weights(mlp_specs([3, 4, 1]), 0)
        g = Gradients(net)
        g.weights(1)[0, 2] = np.nan
        with pytest.raises(NumericError, match="layer 1"):
            nadam_step(net, g, NadamState.zeros(net))

    def test_hyper_validation(self):
        assert NadamHyper() == NadamHyper(0.002, 0.9, 0.999, 1e-8)
        for bad in (dict(eta=0), dict(beta1=1.0), dict(beta2=0.0), dict(epsilon=-1)):
            with pytest.raises(ConfigError):
                NadamHyper(**bad)


class TestSgd:
    def test_examples(self):
        net = Network([LayerSpec(1, 1, Activation.IDENTITY)], [1.0, 0.5])
        sgd_step(net, grads_for(net, [2.0, 0.0]), 0.1)
        assert net.params[0] == pytest.approx(0.8, abs=1e-15)
        assert net.params[1] == 0.5
        sgd_step(net, grads_for(net, [5.0, 5.0]), 0.0)
        assert net.params[1] == 0.5


def test_relative_error():
    assert relative_error([1.0, 0.0], [1.0, 0.0]) == 0.0
    assert relative_error([0.0], [0.0]) == 0.0
    assert relative_error([3.0, 4.0], [3.0, 4.5]) == pytest.approx(0.5 / math.hypot(3, 4.5))
