"""
Checking backpropagation against finite differences
===================================================

Central differences with h = 1e-6 should agree with the analytic gradient to
within round-off, as long as no hidden pre-activation sits on the Leaky ReLU
corner. Draws that land within 1e-4 of it are rejected.
"""

# %%
import numpy as np

from rssi_fcnn.nn import init_weights, mlp_specs
from rssi_fcnn.optim import gradient_check

# %%
for sizes in ([4, 5, 3, 1], [10, 10, 10, 1], [2, 10, 10, 1]):
    worst = []
    for seed in range(20):
        net = init_weights(mlp_specs(sizes), seed)
        res = gradient_check(net, np.random.default_rng(seed), n_samples=3)
        worst.append(res.max_rel_error)
    print(f"{'-'.join(map(str, sizes)):>10}: max relative error {max(worst):.2e}, "
          f"median {np.median(worst):.2e} over 20 networks")

# %% [markdown]
# The relative error is taken over the whole gradient vector,
# ``||g_analytic - g_numeric|| / max(||g_analytic||, ||g_numeric||)``. An
# element-by-element ratio blows up on parameters whose true gradient is
# around 1e-6, where the finite-difference round-off (about 1e-10) is no
# longer small relative to the value itself.

# %%
net = init_weights(mlp_specs([10, 10, 10, 1]), 3)
res = gradient_check(net, np.random.default_rng(3), n_samples=5)
print(f"{res.n_checked} gradients, largest absolute gap {res.max_abs_error:.2e}")
