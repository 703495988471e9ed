"""Acceptance criteria, each run at its stated tolerance.

Every test prints one PASS/FAIL line (also collected in the terminal
summary) before asserting, so a failing criterion still reports its numbers.
The Model A and Model B runs use seed 0 throughout.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from rssi_fcnn.chansim import ChannelParams, SweepSpec, simulate_location_sweep, simulate_stationary_trace
from rssi_fcnn.cli import main
from rssi_fcnn.data import RssiTrace, average_locations, make_windows, temporal_split
from rssi_fcnn.evaluation import LeastSquaresAR, Persistence, run_baseline
from rssi_fcnn.models import ModelConfig, build_model, evaluate, prepare_model_a, prepare_model_b, train
from rssi_fcnn.nn import Activation, Gradients, LayerSpec, Network, init_weights, mlp_specs, param_count
from rssi_fcnn.optim import NadamState, gradient_check, nadam_step

SEED = 0


# ---------------------------------------------------------------------------
# 1-4: structural oracles


def test_c01_parameter_counts(acceptance):
    t0 = time.perf_counter()
    a = param_count(build_model(ModelConfig("A", seed=SEED)))
    b = param_count(build_model(ModelConfig("B", seed=SEED)))
    elapsed = time.perf_counter() - t0
    ok = a == 231 and b == 151 and elapsed < 1.0
    acceptance(1, "parameter counts", ok, f"A={a} (want 231), B={b} (want 151), {elapsed:.3f} s")
    assert ok


def test_c02_gradient_check(acceptance):
    t0 = time.perf_counter()
    worst, checked, skipped = 0.0, 0, 0
    seeds = range(20)
    for seed in seeds:
        net = init_weights(mlp_specs([4, 5, 3, 1]), seed)
        res = gradient_check(net, np.random.default_rng(1000 + seed), n_samples=3, h=1e-6, kink=1e-4)
        worst = max(worst, res.max_rel_error)
        checked += res.n_checked
        skipped += res.n_skipped
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 10.0
    acceptance(2, "gradient check 4-5-3-1", ok,
               f"max rel error {worst:.2e} (<= 1e-5) over {len(seeds)} networks, "
               f"{checked} gradients, {skipped} kink draws rejected, {elapsed:.2f} s")
    assert ok


def scalar_nadam(grads, eta=0.002, b1=0.9, b2=0.999, eps=1e-8):
    """Plain-float NAdam recurrence for one parameter starting at 0."""
    w, m, v = 0.0, 0.0, 0.0
    out = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        w = w - eta / (math.sqrt(v_hat) + eps) * (b1 * m_hat + (1 - b1) * g / (1 - b1**t))
        out.append(w)
    return out


def test_c03_nadam_oracle(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    script = rng.normal(0.0, 1.0, size=(100, 3)) * np.array([1.0, 1e-3, 50.0])
    script[0, 0] = 0.5

    net = Network([LayerSpec(2, 1, Activation.IDENTITY)], np.zeros(3))
    state = NadamState.zeros(net)
    trajectory = []
    for g in script:
        nadam_step(net, Gradients(net, g.copy()), state)
        trajectory.append(net.params.copy())
    trajectory = np.array(trajectory)
    expected = np.array([scalar_nadam(script[:, k]) for k in range(3)]).T
    diff = float(np.max(np.abs(trajectory - expected)))
    first = float(trajectory[0, 0])
    elapsed = time.perf_counter() - t0
    # m_hat = 0.5, v_hat = 0.25: -eta / (0.5 + eps) * (0.9 * 0.5 + 0.1 * 0.5 / 0.1)
    hand = -0.002 / (0.5 + 1e-8) * 0.95
    ok = (diff <= 1e-15 and abs(first - hand) <= 1e-15 and round(first, 6) == -0.0038
          and elapsed < 1.0)
    acceptance(3, "NAdam vs scalar recurrence", ok,
               f"max |diff| {diff:.1e} (<= 1e-15) over 100 steps, first step {first:.6g} "
               f"(hand value {hand:.10g}, about -0.0038), {elapsed:.3f} s")
    assert ok


def test_c04_windowing_oracle(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for _ in range(50):
        n = int(rng.integers(11, 201))
        series = rng.normal(-60.0, 2.0, n)
        ds = make_windows(RssiTrace(series), 10)
        brute_x, brute_y = [], []
        for i in range(n - 10):
            brute_x.append([series[i + j] for j in range(10)])
            brute_y.append(series[i + 10])
        same = (len(ds) == n - 10
                and np.array_equal(ds.inputs, np.array(brute_x))
                and np.array_equal(ds.targets, np.array(brute_y)))
        mismatches += not same
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 5.0
    acceptance(4, "windowing vs brute force", ok,
               f"{50 - mismatches}/50 series identical, {elapsed:.2f} s")
    assert ok


# ---------------------------------------------------------------------------
# 5, 6, 10: Model A on synthetic stationary traces


def model_a_run(preset):
    trace = simulate_stationary_trace(ChannelParams.preset(preset, seed=SEED), n_samples=10_000)
    cfg = ModelConfig("A", seed=SEED)
    split = prepare_model_a(trace, cfg)
    t0 = time.perf_counter()
    net, history = train(cfg, split)
    elapsed = time.perf_counter() - t0
    test = evaluate(net, split).mse
    persistence = run_baseline(Persistence(), split).mse
    return dict(history=history, test=test, persistence=persistence, seconds=elapsed,
                sigma=ChannelParams.preset(preset).shadow_sigma_db)


@pytest.fixture(scope="module")
def los_run():
    return model_a_run("los")


@pytest.fixture(scope="module")
def nlos_run():
    return model_a_run("nlos")


def test_c05_model_a_learning(acceptance, los_run):
    r = los_run
    first, last = r["history"].train_mse[0], r["history"].train_mse[-1]
    ratio = last / first
    bound = 2.0 * r["sigma"] ** 2
    parts = {
        "a": ratio <= 0.5,
        "b": r["test"] <= r["persistence"],
        "c": r["test"] <= bound,
    }
    ok = all(parts.values())
    acceptance(
        5, "Model A LoS learning", ok,
        f"(a) train MSE {first:.5f} -> {last:.5f}, ratio {ratio:.3f} <= 0.5 "
        f"[{'ok' if parts['a'] else 'no'}]; "
        f"(b) test {r['test']:.6f} vs persistence {r['persistence']:.6f} dBm^2, "
        f"ratio {r['test'] / r['persistence']:.4f} [{'ok' if parts['b'] else 'no'}]; "
        f"(c) test {r['test']:.6f} <= {bound:.2f} [{'ok' if parts['c'] else 'no'}]",
    )
    assert ok


def test_c06_nlos_ordering(acceptance, los_run, nlos_run):
    ok = nlos_run["test"] > los_run["test"]
    acceptance(6, "NLoS test MSE > LoS", ok,
               f"NLoS {nlos_run['test']:.6f} vs LoS {los_run['test']:.6f} dBm^2")
    assert ok


def test_c10_training_budget(acceptance, los_run):
    ok = los_run["seconds"] < 180.0
    acceptance(10, "Model A training time", ok, f"{los_run['seconds']:.2f} s (< 180 s)")
    assert ok


# ---------------------------------------------------------------------------
# 7: Model B


def test_c07_model_b_pipeline(acceptance):
    t0 = time.perf_counter()
    sweep = simulate_location_sweep(ChannelParams.preset("los", seed=SEED), SweepSpec())
    means = average_locations(sweep)
    cfg = ModelConfig("B", seed=SEED)
    split = prepare_model_b(means, cfg)
    net, history = train(cfg, split)
    test = evaluate(net, split).mse
    persistence = run_baseline(Persistence(), split).mse
    elapsed = time.perf_counter() - t0
    finite = len(history.train_mse) == 300 and bool(np.all(np.isfinite(history.train_mse)))
    ok = len(means) == 11 and finite and test <= persistence and elapsed < 30.0
    acceptance(7, "Model B location sweep", ok,
               f"{len(means)} location means, finite history {finite}, "
               f"test {test:.4f} vs persistence {persistence:.4f} dBm^2, {elapsed:.2f} s")
    assert ok


# ---------------------------------------------------------------------------
# 8: classical baselines


def test_c08_baselines(acceptance):
    ramp = RssiTrace(-40.0 - 0.25 * np.arange(300.0))
    ar = run_baseline(LeastSquaresAR(2), temporal_split(make_windows(ramp, 2), 0.8)).mse

    sigma = 1.5
    noise = RssiTrace(np.random.default_rng(SEED).normal(-60.0, sigma, 12_600))
    split = temporal_split(make_windows(noise, 10), 0.2)
    pers = run_baseline(Persistence(), split)
    rel = abs(pers.mse - 2 * sigma**2) / (2 * sigma**2)
    ok = ar <= 1e-10 and rel <= 0.15 and pers.n_pairs >= 10_000
    acceptance(8, "baseline sanity", ok,
               f"AR(2) ramp test MSE {ar:.1e} (<= 1e-10); persistence {pers.mse:.4f} vs "
               f"2 sigma^2 = {2 * sigma**2:.4f} over {pers.n_pairs} pairs, off by {rel:.1%} (<= 15%)")
    assert ok


# ---------------------------------------------------------------------------
# 9: end-to-end determinism through the command line


def cli_pipeline(root):
    steps = [
        ["simulate", "--preset", "los", "--seed", SEED, "--out", root / "trace.csv"],
        ["preprocess", root / "trace.csv", "--variant", "a", "--out", root / "dataset.json"],
        ["train", "--dataset", root / "dataset.json", "--variant", "a", "--seed", SEED,
         "--out", root / "model.json"],
        ["evaluate", "--model", root / "model.json", "--dataset", root / "dataset.json",
         "--out", root / "metrics.json"],
    ]
    for argv in steps:
        code = main([str(a) for a in argv])
        if code != 0:
            raise AssertionError(f"{argv[0]} exited {code}")
    return (root / "metrics.json").read_bytes()


@pytest.fixture(scope="module")
def cli_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_first")
    with pytest.MonkeyPatch.context() as mp:
        mp.chdir(root)
        return cli_pipeline(Path("."))


def test_c09_determinism(acceptance, cli_run, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    second = cli_pipeline(Path("."))
    ok = cli_run == second
    acceptance(9, "byte-identical metrics JSON", ok,
               f"two full Model A pipeline runs, {len(second)} bytes each, identical={ok}")
    assert ok


def test_cli_metrics_beat_persistence(cli_run):
    scores = {e["label"]: e["mse_dbm2"] for e in json.loads(cli_run)["entries"]}
    assert scores["fcnn_a"] <= scores["persistence"]
