"""Synthetic indoor RSSI traces.

Mean level follows the log-distance path-loss model; temporal fluctuation is
a first-order autoregressive Gaussian shadowing process in the dB domain::

    mu   = P_tx - (PL0 + 10 n log10(d / d0))
    s[0] = sigma * xi_0
    s[t] = rho * s[t-1] + sqrt(1 - rho^2) * sigma * xi_t
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from .data import Condition, LocationSet, RssiTrace, Scenario
from .errors import ParameterError


@dataclass(frozen=True)
class ChannelParams:
    tx_power_dbm: float = -20.0
    pl0_dbm: float = 40.0
    d0_m: float = 1.0
    exponent: float = 2.0
    shadow_sigma_db: float = 0.3
    shadow_rho: float = 0.95
    seed: int = 0
    condition: Condition = Condition.LOS

    def __post_init__(self):
        if not self.d0_m > 0:
            raise ParameterError(f"reference distance must be > 0, got {self.d0_m}")
        if not self.exponent > 0:
            raise ParameterError(f"path-loss exponent must be > 0, got {self.exponent}")
        if not self.shadow_sigma_db >= 0:
            raise ParameterError(f"shadowing sigma must be >= 0, got {self.shadow_sigma_db}")
        if not 0.0 <= self.shadow_rho < 1.0:
            raise ParameterError(f"shadowing correlation must lie in [0, 1), got {self.shadow_rho}")
        object.__setattr__(self, "condition", Condition(self.condition))

    @classmethod
    def preset(cls, name, seed=0, **overrides):
        """``"los"``: exponent 2.0, sigma 0.3 dB; ``"nlos"``: exponent 3.0, sigma 0.7 dB."""
        presets = {
            "los": dict(exponent=2.0, shadow_sigma_db=0.3, condition=Condition.LOS),
            "nlos": dict(exponent=3.0, shadow_sigma_db=0.7, condition=Condition.NLOS),
        }
        try:
            base = presets[str(name).lower()]
        except KeyError:
            raise ParameterError(f"unknown preset {name!r}; choose from {sorted(presets)}") from None
        return cls(seed=seed, **{**base, **overrides})

    def mean_rssi(self, distance_m):
        """Deterministic path-loss level at ``distance_m`` (dBm)."""
        d = np.asarray(distance_m, dtype=np.float64)
        if np.any(d <= 0):
            raise ParameterError(f"distance must be > 0, got {distance_m}")
        mu = self.tx_power_dbm - (self.pl0_dbm + 10.0 * self.exponent * np.log10(d / self.d0_m))
        return float(mu) if mu.ndim == 0 else mu


@dataclass(frozen=True)
class SweepSpec:
    """Per-location receiver distances and samples collected at each."""

    distances_m: tuple = field(default_factory=lambda: tuple(np.round(np.linspace(1.5, 3.5, 11), 2)))
    samples_per_location: int = 250

    def __post_init__(self):
        object.__setattr__(self, "distances_m", tuple(float(d) for d in self.distances_m))
        if not self.distances_m:
            raise ParameterError("sweep needs at least one location")
        if any(d <= 0 for d in self.distances_m):
            raise ParameterError(f"distances must be > 0, got {self.distances_m}")
        if self.samples_per_location < 1:
            raise ParameterError("samples_per_location must be >= 1")


def ar1_shadowing(rng, n, sigma, rho):
    """AR(1) Gaussian sequence with stationary standard deviation ``sigma``."""
    xi = rng.standard_normal(n)
    drive = np.sqrt(1.0 - rho * rho) * sigma * xi
    drive[0] = sigma * xi[0]
    return lfilter([1.0], [1.0, -rho], drive)


def simulate_stationary_trace(p, distance_m=3.0, n_samples=10_000, rng=None):
    """Fixed transmitter-receiver pair; seeded from ``p.seed`` unless ``rng`` is given."""
    if n_samples < 1:
        raise ParameterError(f"n_samples must be >= 1, got {n_samples}")
    mu = p.mean_rssi(distance_m)
    if rng is None:
        rng = np.random.default_rng(p.seed)
    samples = mu + ar1_shadowing(rng, n_samples, p.shadow_sigma_db, p.shadow_rho)
    return RssiTrace(samples, Scenario.STATIONARY, p.condition,
                     source=f"chansim stationary d={distance_m} m seed={p.seed}")


def simulate_readings(p, n_readings, distance_m=3.0, n_samples=10_000):
    """Independent repeated captures of the stationary scenario (one per reading).

    A single reading is exactly ``simulate_stationary_trace(p, ...)``; more
    readings draw from independent child streams of ``p.seed``.
    """
    if n_readings < 1:
        raise ParameterError(f"n_readings must be >= 1, got {n_readings}")
    if n_readings == 1:
        return [simulate_stationary_trace(p, distance_m, n_samples)]
    children = np.random.SeedSequence(p.seed).spawn(n_readings)
    return [
        simulate_stationary_trace(p, distance_m, n_samples, rng=np.random.default_rng(c))
        for c in children
    ]


def simulate_location_sweep(p, spec=SweepSpec()):
    """One stationary capture per location plus a per-location shadowing offset."""
    rng = np.random.default_rng(p.seed)
    n = len(spec.distances_m)
    offsets = rng.normal(0.0, p.shadow_sigma_db, size=n)
    groups = []
    for d, off in zip(spec.distances_m, offsets):
        trace = simulate_stationary_trace(p, d, spec.samples_per_location, rng=rng)
        groups.append(trace.samples + off)
    labels = tuple(f"L{i + 1}" for i in range(n))
    return LocationSet(labels, tuple(groups), p.condition,
                       source=f"chansim sweep seed={p.seed}")


def with_seed(p, seed):
    return replace(p, seed=seed)
