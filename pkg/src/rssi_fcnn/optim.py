"""NAdam and SGD updates, plus a finite-difference gradient oracle."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError, ShapeError
from .nn import Gradients, forward, mse_loss


@dataclass(frozen=True)
class NadamHyper:
    eta: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError(f"eta must be > 0, got {self.eta}")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not 0.0 < b < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {b}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass
class NadamState:
    """First/second moment accumulators and the number of completed steps."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, net):
        return cls(np.zeros(net.params.size), np.zeros(net.params.size), 0)

    def copy(self):
        return NadamState(self.m.copy(), self.v.copy(), self.t)


def _check_shapes(net, grads, *others):
    if not isinstance(grads, Gradients) or grads.specs != net.specs:
        raise ShapeError("gradients do not mirror the network layout")
    for arr in others:
        if arr.shape != net.params.shape:
            raise ShapeError(f"optimizer state shape {arr.shape} != {net.params.shape}")


def _check_finite(grads):
    if np.all(np.isfinite(grads.flat)):
        return
    for i in range(len(grads.specs)):
        if not (np.all(np.isfinite(grads.weights(i))) and np.all(np.isfinite(grads.bias(i)))):
            raise NumericError(f"non-finite gradient in layer {i}")


def nadam_step(net, grads, state, hyper=NadamHyper()):
    """One NAdam update of ``net.params`` in place; advances ``state``.

    With ``t`` the 1-based step index::

        m = b1 m + (1 - b1) g          m_hat = m / (1 - b1^t)
        v = b2 v + (1 - b2) g^2        v_hat = v / (1 - b2^t)
        w -= eta / (sqrt(v_hat) + eps) * (b1 m_hat + (1 - b1) g / (1 - b1^t))
    """
    _check_shapes(net, grads, state.m, state.v)
    _check_finite(grads)
    b1, b2 = hyper.beta1, hyper.beta2
    g = grads.flat
    t = state.t + 1
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t

    state.m *= b1
    state.m += (1.0 - b1) * g
    state.v *= b2
    state.v += (1.0 - b2) * (g * g)
    m_hat = state.m / bc1
    v_hat = state.v / bc2
    net.params -= hyper.eta / (np.sqrt(v_hat) + hyper.epsilon) * (b1 * m_hat + (1.0 - b1) * g / bc1)
    state.t = t
    return net, state


def sgd_step(net, grads, eta):
    _check_shapes(net, grads)
    net.params -= eta * grads.flat
    return net


def finite_difference_grad(net, x, target, h=1e-6):
    """Central differences of the MSE loss with respect to every parameter."""
    if not h > 0:
        raise ConfigError(f"step h must be > 0, got {h}")
    probe = net.copy()
    out = Gradients(net)
    for p in range(probe.params.size):
        orig = probe.params[p]
        probe.params[p] = orig + h
        up, _ = mse_loss(forward(probe, x)[0], target)
        probe.params[p] = orig - h
        down, _ = mse_loss(forward(probe, x)[0], target)
        probe.params[p] = orig
        out.flat[p] = (up - down) / (2.0 * h)
    return out


@dataclass
class GradCheckResult:
    max_rel_error: float
    max_abs_error: float
    n_checked: int
    n_skipped: int = 0
    per_sample: list = field(default_factory=list)


def relative_error(analytic, numeric):
    """Norm-wise relative error ``||a - n|| / max(||a||, ||n||)``.

    Element-wise ratios are dominated by round-off on gradients near 1e-6
    (central differences at h = 1e-6 carry ~eps * loss / h of absolute noise),
    so the whole gradient vector is compared instead.
    """
    a = np.ravel(analytic)
    n = np.ravel(numeric)
    scale = max(np.linalg.norm(a), np.linalg.norm(n))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(a - n) / scale)


def gradient_check(net, rng, n_samples=1, h=1e-6, kink=1e-4, max_draws=1000):
    """Compare :func:`~rssi_fcnn.nn.backward` with central differences.

    Inputs and targets are standard-normal draws from ``rng``.  Any draw that
    puts a pre-activation within ``kink`` of zero is rejected and redrawn, so
    no parameter is ever compared across the Leaky ReLU corner.
    """
    from .nn import backward

    result = GradCheckResult(0.0, 0.0, 0)
    for _ in range(n_samples):
        for _ in range(max_draws):
            x = rng.standard_normal(net.in_dim)
            target = rng.standard_normal(net.out_dim)
            pred, trace = forward(net, x)
            if all(np.min(np.abs(z)) >= kink for z in trace.z[:-1]):
                break
            result.n_skipped += 1
        else:
            raise NumericError(f"no kink-free input found in {max_draws} draws")
        _, g_out = mse_loss(pred, target)
        analytic = backward(net, trace, g_out).flat
        numeric = finite_difference_grad(net, x, target, h).flat
        err = relative_error(analytic, numeric)
        result.per_sample.append(err)
        result.max_rel_error = max(result.max_rel_error, err)
        result.max_abs_error = max(result.max_abs_error, float(np.max(np.abs(analytic - numeric))))
        result.n_checked += analytic.size
    return result
