"""Model A (window 10, 200 epochs) and Model B (window 2, 300 epochs).

Both are ``window -> 10 -> 10 -> 1`` networks with Leaky ReLU hidden layers
and a linear output, trained online (one NAdam step per window, in time
order, never shuffled).
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import _kernel
from .data import (
    location_split,
    make_windows,
    temporal_split,
    with_normalizer,
)
from .errors import ConfigError, DataError, NumericError, ShapeError
from .evaluation import Metrics, compute_metrics
from .nn import backward, forward, init_weights, mlp_specs, mse_loss, param_count
from .optim import NadamHyper, NadamState, nadam_step

log = logging.getLogger(__name__)

VARIANTS = {
    "A": dict(window=10, epochs=200),
    "B": dict(window=2, epochs=300),
}
HIDDEN = 10

# Online updates with batch size 1 make the optimizer's generic 0.002 far too
# jumpy for the 8000-pair stationary traces; Model B sees only six pairs per
# epoch and needs a larger step to fit them within 300 epochs.
DEFAULT_ETA = {"A": 3e-5, "B": 5e-4}


@dataclass(frozen=True)
class ModelConfig:
    variant: str = "A"
    window: int = None
    epochs: int = None
    seed: int = 0
    hidden: int = HIDDEN
    hyper: NadamHyper = None
    normalize: bool = True
    override: bool = False

    def __post_init__(self):
        variant = str(self.variant).upper()
        if variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected A or B")
        object.__setattr__(self, "variant", variant)
        fixed = VARIANTS[variant]
        for key, val in fixed.items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, val)
            elif getattr(self, key) != val and not self.override:
                raise ConfigError(
                    f"variant {variant} fixes {key}={val}; got {getattr(self, key)} "
                    "(set override to change it)"
                )
        if self.hyper is None:
            object.__setattr__(self, "hyper", NadamHyper(eta=DEFAULT_ETA[variant]))
        if self.hidden != HIDDEN and not self.override:
            raise ConfigError(f"hidden layers have {HIDDEN} neurons; got {self.hidden}")
        if self.window < 1 or self.hidden < 1 or self.epochs < 0:
            raise ConfigError("window and hidden must be >= 1, epochs >= 0")
        if self.seed is None:
            raise ConfigError("a seed is required")

    @property
    def layer_sizes(self):
        return [self.window, self.hidden, self.hidden, 1]

    def to_dict(self):
        d = asdict(self)
        d["hyper"] = asdict(self.hyper)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        hyper = d.pop("hyper", None) or {}
        return cls(hyper=NadamHyper(**hyper), **d)


@dataclass
class TrainingHistory:
    """Epoch-mean training MSE (dBm^2) and timings."""

    train_mse: list
    train_seconds: float = 0.0
    test_mse: float = None
    test_rmse: float = None

    def to_dict(self):
        return asdict(self)


def build_model(cfg):
    return init_weights(mlp_specs(cfg.layer_sizes), cfg.seed)


def _scaled(split):
    norm = split.normalizer
    if norm is None:
        return split.train.inputs, split.train.targets, 1.0
    return norm.apply(split.train.inputs), norm.apply(split.train.targets), norm.std**2


def train(cfg, split, engine="compiled"):
    """Train a fresh network on ``split.train`` for exactly ``cfg.epochs`` epochs.

    ``engine="numpy"`` runs the same loop through :func:`~rssi_fcnn.nn.forward`,
    :func:`~rssi_fcnn.nn.backward` and :func:`~rssi_fcnn.optim.nadam_step`;
    it is much slower and exists as a reference.
    """
    if len(split.train) == 0:
        raise DataError("training set is empty")
    if split.window != cfg.window:
        raise ShapeError(f"dataset window {split.window} != model window {cfg.window}")
    if cfg.normalize != (split.normalizer is not None):
        raise ConfigError(
            f"config normalize={cfg.normalize} but the split "
            f"{'has' if split.normalizer else 'has no'} normalizer"
        )

    net = build_model(cfg)
    X, Y, scale = _scaled(split)
    Y = Y.reshape(-1, 1)
    state = NadamState.zeros(net)
    hyper = cfg.hyper
    history = TrainingHistory([])
    losses = np.empty(len(X))

    if engine == "compiled":
        layout = _kernel.layout_arrays(net)
        X = np.ascontiguousarray(X)
        Y = np.ascontiguousarray(Y)

    t0 = time.perf_counter()
    for epoch in range(cfg.epochs):
        if engine == "compiled":
            state.t, bad = _kernel.train_epoch(
                net.params, *layout, X, Y, hyper.eta, hyper.beta1, hyper.beta2,
                hyper.epsilon, state.m, state.v, state.t, losses,
            )
        elif engine == "numpy":
            bad = -1
            for i in range(len(X)):
                pred, trace = forward(net, X[i])
                losses[i], g_out = mse_loss(pred, Y[i])
                if not math.isfinite(losses[i]):
                    bad = i
                    break
                nadam_step(net, backward(net, trace, g_out), state, hyper)
        else:
            raise ConfigError(f"unknown engine {engine!r}")
        if bad >= 0:
            raise NumericError(f"non-finite loss at epoch {epoch + 1}, pair {bad}")
        history.train_mse.append(float(losses.mean() * scale))
        log.debug("epoch %d/%d train MSE %.6f dBm^2", epoch + 1, cfg.epochs, history.train_mse[-1])
    history.train_seconds = time.perf_counter() - t0

    if len(split.test):
        m = evaluate(net, split)
        history.test_mse, history.test_rmse = m.mse, m.rmse
    return net, history


def predict(net, split, which="test"):
    """De-normalized predictions (dBm) for the ``train`` or ``test`` pairs."""
    ds = getattr(split, which)
    if ds.window != net.in_dim:
        raise ShapeError(f"dataset window {ds.window} != network input dim {net.in_dim}")
    norm = split.normalizer
    X = ds.inputs if norm is None else norm.apply(ds.inputs)
    out = net.predict(X)[:, 0]
    return out if norm is None else norm.invert(out)


def evaluate(net, split):
    """Test-set MSE/RMSE in dBm units plus inference time."""
    if len(split.test) == 0:
        raise DataError("test set is empty")
    t0 = time.perf_counter()
    preds = predict(net, split, "test")
    elapsed = time.perf_counter() - t0
    m = compute_metrics(preds, split.test.targets)
    m.test_seconds = elapsed
    m.param_count = param_count(net)
    return m


# ---------------------------------------------------------------------------
# pipelines


def prepare_model_a(trace, cfg, train_fraction=0.8):
    """Sliding windows over a stationary trace, split 80/20 in time order."""
    split = temporal_split(make_windows(trace, cfg.window), train_fraction)
    return with_normalizer(split) if cfg.normalize else split


def prepare_model_b(location_trace, cfg, train_locations=8, test_locations=2):
    """Windows over per-location means; targets L(w+1)..L8 train, L9..L10 test."""
    split = location_split(make_windows(location_trace, cfg.window), train_locations, test_locations)
    return with_normalizer(split) if cfg.normalize else split


@dataclass
class RunResult:
    net: object
    history: TrainingHistory
    metrics: Metrics
    split: object


def run(cfg, split, engine="compiled"):
    net, history = train(cfg, split, engine)
    metrics = evaluate(net, split)
    metrics.train_seconds = history.train_seconds
    return RunResult(net, history, metrics, split)


def config_for(variant, seed, **kwargs):
    return ModelConfig(variant=variant, seed=seed, **kwargs)


def with_epochs(cfg, epochs):
    """Copy of ``cfg`` with a different epoch budget (sets the override flag)."""
    return replace(cfg, epochs=epochs, override=True)
