"""Dense feedforward network with Leaky ReLU hidden layers.

All trainable parameters of a :class:`Network` live in one flat ``float64``
vector; ``weights(i)`` and ``bias(i)`` are row-major views into it.  This keeps
the optimizer a single vectorized update and makes serialization trivial.
"""

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, FileAccessError, LoadError, ShapeError
from .linalg import affine, as_vector

LEAKY_SLOPE = 0.01


class Activation(str, Enum):
    LEAKY_RELU = "leaky_relu"
    IDENTITY = "identity"


def leaky_relu(x, mode="value"):
    """Leaky ReLU ``max(0.01 x, x)`` or its derivative.

    The derivative at exactly ``x == 0`` is taken as the negative-branch slope.
    Works elementwise on arrays as well as on scalars.
    """
    x = np.asarray(x, dtype=np.float64)
    if mode == "value":
        out = np.where(x > 0, x, LEAKY_SLOPE * x)
    elif mode == "derivative":
        out = np.where(x > 0, 1.0, LEAKY_SLOPE)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return out if out.ndim else float(out)


def _activate(kind, z):
    if kind is Activation.LEAKY_RELU:
        return leaky_relu(z)
    return z.copy()


def _activation_slope(kind, z):
    if kind is Activation.LEAKY_RELU:
        return leaky_relu(z, "derivative")
    return np.ones_like(z)


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: Activation = Activation.LEAKY_RELU

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ConfigError(f"layer dims must be >= 1, got {self.in_dim}->{self.out_dim}")
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def n_params(self):
        return self.in_dim * self.out_dim + self.out_dim


def mlp_specs(sizes, hidden_activation=Activation.LEAKY_RELU):
    """Layer specs for ``sizes = [in, h1, ..., out]``; the output layer is linear."""
    if len(sizes) < 2:
        raise ConfigError("need at least input and output sizes")
    n = len(sizes) - 1
    return [
        LayerSpec(a, b, Activation.IDENTITY if i == n - 1 else hidden_activation)
        for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:]))
    ]


def _check_chain(specs):
    if not specs:
        raise ConfigError("empty layer list")
    for t, (a, b) in enumerate(zip(specs[:-1], specs[1:])):
        if a.out_dim != b.in_dim:
            raise ConfigError(
                f"layer {t} out_dim {a.out_dim} does not feed layer {t + 1} in_dim {b.in_dim}"
            )


class _FlatLayout:
    """Offsets of each layer's weight block and bias block in the flat vector."""

    def __init__(self, specs):
        self.specs = tuple(specs)
        self.w_slices = []
        self.b_slices = []
        pos = 0
        for s in self.specs:
            self.w_slices.append(slice(pos, pos + s.in_dim * s.out_dim))
            pos += s.in_dim * s.out_dim
            self.b_slices.append(slice(pos, pos + s.out_dim))
            pos += s.out_dim
        self.size = pos

    def weights(self, flat, i):
        s = self.specs[i]
        return flat[self.w_slices[i]].reshape(s.out_dim, s.in_dim)

    def bias(self, flat, i):
        return flat[self.b_slices[i]]


class Network:
    """Ordered dense layers backed by one flat parameter vector."""

    def __init__(self, specs, params=None):
        specs = list(specs)
        _check_chain(specs)
        self.layout = _FlatLayout(specs)
        if params is None:
            params = np.zeros(self.layout.size)
        params = np.array(params, dtype=np.float64)
        if params.shape != (self.layout.size,):
            raise ShapeError(f"expected {self.layout.size} parameters, got shape {params.shape}")
        self.params = params

    @property
    def specs(self):
        return self.layout.specs

    @property
    def n_layers(self):
        return len(self.layout.specs)

    @property
    def in_dim(self):
        return self.specs[0].in_dim

    @property
    def out_dim(self):
        return self.specs[-1].out_dim

    def weights(self, i):
        return self.layout.weights(self.params, i)

    def bias(self, i):
        return self.layout.bias(self.params, i)

    def copy(self):
        return Network(self.specs, self.params.copy())

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.specs == other.specs and np.array_equal(self.params, other.params)

    def __repr__(self):
        dims = "->".join([str(self.in_dim)] + [str(s.out_dim) for s in self.specs])
        return f"Network({dims}, params={param_count(self)})"

    def predict(self, inputs):
        """Outputs for a batch of input rows (shape ``(n, in_dim)``)."""
        a = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        if a.shape[1] != self.in_dim:
            raise ShapeError(f"inputs have {a.shape[1]} columns, network expects {self.in_dim}")
        for i, s in enumerate(self.specs):
            z = a @ self.weights(i).T + self.bias(i)
            a = leaky_relu(z) if s.activation is Activation.LEAKY_RELU else z
        return a


@dataclass
class ForwardTrace:
    """Cached input plus per-layer pre-activations ``z`` and activations ``a``."""

    input: np.ndarray
    z: list
    a: list


class Gradients:
    """Per-parameter gradients laid out exactly like the owning network."""

    def __init__(self, net, flat=None):
        self.layout = net.layout
        self.flat = np.zeros(self.layout.size) if flat is None else np.asarray(flat, dtype=np.float64)
        if self.flat.shape != (self.layout.size,):
            raise ShapeError(f"gradient vector shape {self.flat.shape} != ({self.layout.size},)")

    def weights(self, i):
        return self.layout.weights(self.flat, i)

    def bias(self, i):
        return self.layout.bias(self.flat, i)

    @property
    def specs(self):
        return self.layout.specs


def forward(net, x):
    """Run one input vector through ``net``; returns ``(output, trace)``."""
    x = as_vector(x)
    if x.shape[0] != net.in_dim:
        raise ShapeError(f"input length {x.shape[0]} != network input dim {net.in_dim}")
    zs, acts = [], []
    a = x
    for i, s in enumerate(net.specs):
        z = affine(net.weights(i), a, net.bias(i))
        a = _activate(s.activation, z)
        zs.append(z)
        acts.append(a)
    return a.copy(), ForwardTrace(x, zs, acts)


def mse_loss(pred, target):
    """Mean squared error and its gradient with respect to ``pred``."""
    pred = as_vector(pred)
    target = as_vector(target)
    if pred.shape != target.shape or pred.size == 0:
        raise ShapeError(f"mse_loss: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    n = diff.size
    return float(np.dot(diff, diff) / n), (2.0 / n) * diff


def backward(net, trace, grad_output):
    """Exact gradients of a scalar loss given ``dL/d(output)``."""
    grad_output = as_vector(grad_output)
    if len(trace.z) != net.n_layers or trace.input.shape[0] != net.in_dim:
        raise ShapeError("forward trace does not belong to this network")
    for i, s in enumerate(net.specs):
        if trace.z[i].shape != (s.out_dim,):
            raise ShapeError(f"trace layer {i} has shape {trace.z[i].shape}, expected ({s.out_dim},)")
    if grad_output.shape != (net.out_dim,):
        raise ShapeError(f"output gradient shape {grad_output.shape} != ({net.out_dim},)")

    grads = Gradients(net)
    delta = grad_output
    for i in range(net.n_layers - 1, -1, -1):
        s = net.specs[i]
        delta = delta * _activation_slope(s.activation, trace.z[i])
        prev = trace.input if i == 0 else trace.a[i - 1]
        grads.weights(i)[...] = np.outer(delta, prev)
        grads.bias(i)[...] = delta
        if i:
            delta = net.weights(i).T @ delta
    return grads


def init_weights(specs, seed):
    """Glorot-uniform weights, zero biases; deterministic in ``seed``."""
    specs = list(specs)
    _check_chain(specs)
    rng = np.random.default_rng(seed)
    net = Network(specs)
    for i, s in enumerate(specs):
        limit = np.sqrt(6.0 / (s.in_dim + s.out_dim))
        net.weights(i)[...] = rng.uniform(-limit, limit, size=(s.out_dim, s.in_dim))
    return net


def param_count(net):
    return sum(s.n_params for s in net.specs)


# ---------------------------------------------------------------------------
# serialization

FORMAT = "rssi-fcnn/network"


def network_to_dict(net):
    return {
        "format": FORMAT,
        "version": 1,
        "layers": [
            {
                "in_dim": s.in_dim,
                "out_dim": s.out_dim,
                "activation": s.activation.value,
                "weights": net.weights(i).ravel().tolist(),
                "bias": net.bias(i).tolist(),
            }
            for i, s in enumerate(net.specs)
        ],
    }


def network_from_dict(doc):
    try:
        if doc.get("format") != FORMAT:
            raise LoadError(f"not a network document (format={doc.get('format')!r})")
        specs, chunks = [], []
        for layer in doc["layers"]:
            s = LayerSpec(int(layer["in_dim"]), int(layer["out_dim"]), Activation(layer["activation"]))
            w = np.asarray(layer["weights"], dtype=np.float64)
            b = np.asarray(layer["bias"], dtype=np.float64)
            if w.shape != (s.in_dim * s.out_dim,) or b.shape != (s.out_dim,):
                raise LoadError(f"layer {len(specs)} arrays do not match {s.in_dim}->{s.out_dim}")
            specs.append(s)
            chunks += [w, b]
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LoadError):
            raise
        raise LoadError(f"malformed network document: {exc}") from exc
    return Network(specs, np.concatenate(chunks))


def save_network(net, path, extra=None):
    """Write ``net`` as JSON; floats are written with ``repr`` so they round-trip exactly."""
    doc = network_to_dict(net)
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_network(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise FileAccessError(f"{path}: {exc.strerror or exc}") from exc
    return network_from_dict(doc)
