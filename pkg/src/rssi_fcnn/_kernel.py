"""Compiled online training loop (forward, MSE, backward, NAdam per pair).

Mirrors ``nn.forward``/``nn.backward``/``optim.nadam_step`` on the flat
parameter layout; the pure-numpy path in :func:`rssi_fcnn.models.train` is
the reference it is tested against.
"""

import numpy as np
from numba import njit

from .nn import Activation

ACT_IDENTITY = 0
ACT_LEAKY = 1


def layout_arrays(net):
    specs = net.specs
    in_dims = np.array([s.in_dim for s in specs], dtype=np.int64)
    out_dims = np.array([s.out_dim for s in specs], dtype=np.int64)
    acts = np.array(
        [ACT_LEAKY if s.activation is Activation.LEAKY_RELU else ACT_IDENTITY for s in specs],
        dtype=np.int64,
    )
    woff = np.array([sl.start for sl in net.layout.w_slices], dtype=np.int64)
    boff = np.array([sl.start for sl in net.layout.b_slices], dtype=np.int64)
    aoff = np.zeros(len(specs) + 1, dtype=np.int64)
    aoff[1:] = np.cumsum(out_dims)
    return in_dims, out_dims, acts, woff, boff, aoff


@njit(cache=True)
def train_epoch(params, in_dims, out_dims, acts, woff, boff, aoff,
                X, Y, eta, b1, b2, eps, m, v, t, losses):
    """One pass over the pairs in order.  Returns (new t, index of first non-finite loss or -1)."""
    n_layers = in_dims.shape[0]
    z = np.empty(aoff[n_layers])
    a = np.empty(aoff[n_layers])
    width = 0
    for l in range(n_layers):
        width = max(width, in_dims[l], out_dims[l])
    delta = np.empty(width)
    delta_prev = np.empty(width)
    g = np.empty(params.shape[0])
    n_out = out_dims[n_layers - 1]

    for p in range(X.shape[0]):
        x = X[p]
        # forward
        for l in range(n_layers):
            nin = in_dims[l]
            for r in range(out_dims[l]):
                s = 0.0
                base = woff[l] + r * nin
                for c in range(nin):
                    if l == 0:
                        s += params[base + c] * x[c]
                    else:
                        s += params[base + c] * a[aoff[l - 1] + c]
                s += params[boff[l] + r]
                z[aoff[l] + r] = s
                if acts[l] == ACT_LEAKY and s <= 0.0:
                    a[aoff[l] + r] = 0.01 * s
                else:
                    a[aoff[l] + r] = s

        # loss and dL/d(output)
        last = aoff[n_layers - 1]
        loss = 0.0
        for r in range(n_out):
            d = a[last + r] - Y[p, r]
            loss += d * d
            delta[r] = (2.0 / n_out) * d
        loss /= n_out
        losses[p] = loss
        if not np.isfinite(loss):
            return t, p

        # backward
        for l in range(n_layers - 1, -1, -1):
            nin = in_dims[l]
            nout = out_dims[l]
            for r in range(nout):
                if acts[l] == ACT_LEAKY and z[aoff[l] + r] <= 0.0:
                    delta[r] *= 0.01
            for r in range(nout):
                base = woff[l] + r * nin
                for c in range(nin):
                    if l == 0:
                        g[base + c] = delta[r] * x[c]
                    else:
                        g[base + c] = delta[r] * a[aoff[l - 1] + c]
                g[boff[l] + r] = delta[r]
            if l > 0:
                for c in range(nin):
                    s = 0.0
                    for r in range(nout):
                        s += params[woff[l] + r * nin + c] * delta[r]
                    delta_prev[c] = s
                for c in range(nin):
                    delta[c] = delta_prev[c]

        # NAdam
        t += 1
        bc1 = 1.0 - b1 ** t
        bc2 = 1.0 - b2 ** t
        for k in range(params.shape[0]):
            gk = g[k]
            m[k] = b1 * m[k] + (1.0 - b1) * gk
            v[k] = b2 * v[k] + (1.0 - b2) * (gk * gk)
            m_hat = m[k] / bc1
            v_hat = v[k] / bc2
            params[k] -= eta / (np.sqrt(v_hat) + eps) * (b1 * m_hat + (1.0 - b1) * gk / bc1)
    return t, -1
