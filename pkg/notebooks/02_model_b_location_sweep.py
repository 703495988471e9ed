"""
Model B: predicting the mean RSSI at the next location
======================================================

The receiver moves through eleven positions between 1.5 m and 3.5 m. Each
position contributes one averaged value, and Model B predicts the next
location's mean from the previous two.
"""

# %%
from rssi_fcnn.chansim import ChannelParams, SweepSpec, simulate_location_sweep
from rssi_fcnn.data import average_locations
from rssi_fcnn.evaluation import LeastSquaresAR, Persistence, compare_report, run_baseline
from rssi_fcnn.models import ModelConfig, predict, prepare_model_b, run

# %%
SEED = 0
spec = SweepSpec()
print("distances (m):", spec.distances_m)



def location_means(preset):
    sweep = simulate_location_sweep(ChannelParams.preset(preset, seed=SEED), spec)
    means = average_locations(sweep)
    print(f"{preset}: location means (dBm)")
    for label, m in zip(sweep.labels, means.samples):
        print(f"  {label:>3}: {m:8.3f}")
    return means


means = {preset: location_means(preset) for preset in ("los", "nlos")}

# %% [markdown]
# Pairs whose target is L3..L8 train (six of them) and the pairs targeting L9
# and L10 test. L11 is held out.

# %%
cfg = ModelConfig("B", seed=SEED)
for preset, m in means.items():
    split = prepare_model_b(m, cfg)
    res = run(cfg, split)
    print(f"{preset}: train pairs {len(split.train)}, test pairs {len(split.test)}")
    print("  test targets:    ", split.test.targets.round(3))
    print("  FCNN predictions:", predict(res.net, split).round(3))
    entries = [("fcnn_b", res.metrics)]
    for kind in (Persistence(), LeastSquaresAR(2)):
        entries.append((kind.label, run_baseline(kind, split)))
    print(compare_report(entries).to_text())
