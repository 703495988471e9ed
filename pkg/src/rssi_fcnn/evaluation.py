"""Error metrics, classical one-step baselines and comparison reports.

MSE is reported in dBm^2 and RMSE in dBm.
"""

import json
import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, DataError, LoadError, NumericError

log = logging.getLogger(__name__)


@dataclass
class Metrics:
    mse: float
    rmse: float
    n_pairs: int
    train_seconds: float = 0.0
    test_seconds: float = 0.0
    param_count: int = None

    def __post_init__(self):
        for name in ("mse", "rmse", "train_seconds", "test_seconds"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise NumericError(f"metric {name}={val} must be finite and >= 0")

    def scores(self):
        """Deterministic fields only (no wall-clock timings)."""
        out = {"mse_dbm2": self.mse, "rmse_dbm": self.rmse, "n_pairs": self.n_pairs}
        if self.param_count is not None:
            out["param_count"] = self.param_count
        return out

    def timings(self):
        return {"train_seconds": self.train_seconds, "test_seconds": self.test_seconds}


def compute_metrics(preds, targets):
    """MSE and RMSE of ``preds`` against ``targets``."""
    preds = np.asarray(preds, dtype=np.float64).ravel()
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if preds.size != targets.size:
        raise DataError(f"{preds.size} predictions for {targets.size} targets")
    if preds.size == 0:
        raise DataError("cannot score an empty prediction set")
    diff = preds - targets
    mse = float(np.mean(diff * diff))
    return Metrics(mse=mse, rmse=math.sqrt(mse), n_pairs=int(preds.size))


# ---------------------------------------------------------------------------
# baselines


@dataclass(frozen=True)
class Persistence:
    """Predict the most recent observed value."""

    label = "persistence"


@dataclass(frozen=True)
class MovingAverage:
    window: int

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError(f"moving-average window must be >= 1, got {self.window}")

    @property
    def label(self):
        return f"moving_average({self.window})"


@dataclass(frozen=True)
class LeastSquaresAR:
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError(f"AR order must be >= 1, got {self.order}")

    @property
    def label(self):
        return f"ls_ar({self.order})"


@dataclass
class ARFit:
    """Lag coefficients (most recent lag first) and intercept."""

    coefs: np.ndarray
    intercept: float
    train_mse: float

    def predict(self, inputs):
        lags = _lags(inputs, len(self.coefs))
        return lags @ self.coefs + self.intercept


def _lags(inputs, order):
    # columns: y[t-1], y[t-2], ..., y[t-order]
    return np.asarray(inputs)[:, ::-1][:, :order]


def fit_ar(train, order):
    """Ordinary least squares on lagged values plus intercept via the normal equations.

    Rank-deficient systems (e.g. a noiseless ramp, where the lags and the
    intercept are collinear) fall back to the minimum-norm solution, which
    still fits every consistent pattern exactly.
    """
    if order > train.window:
        raise ConfigError(f"AR order {order} exceeds window {train.window}")
    if len(train) < order + 1:
        raise DataError(f"AR({order}) needs at least {order + 1} training pairs, got {len(train)}")
    X = np.column_stack([_lags(train.inputs, order), np.ones(len(train))])
    y = train.targets
    gram = X.T @ X
    rhs = X.T @ y
    if not (np.all(np.isfinite(gram)) and np.all(np.isfinite(rhs))):
        raise NumericError("non-finite normal equations; try a lower AR order")
    rank = np.linalg.matrix_rank(gram)
    try:
        if rank == gram.shape[0]:
            beta = np.linalg.solve(gram, rhs)
        else:
            log.info("AR(%d) normal equations rank %d < %d; using minimum-norm solution",
                     order, rank, gram.shape[0])
            beta = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular normal equations for AR({order}); try a lower order") from exc
    if not np.all(np.isfinite(beta)):
        raise NumericError(f"AR({order}) fit produced non-finite coefficients; try a lower order")
    resid = X @ beta - y
    return ARFit(beta[:-1], float(beta[-1]), float(np.mean(resid * resid)))


def baseline_predict(kind, split):
    """Predictions in dBm for every test pair of ``split``."""
    inputs = split.test.inputs
    if isinstance(kind, Persistence):
        return inputs[:, -1].copy()
    if isinstance(kind, MovingAverage):
        if kind.window > split.test.window:
            raise ConfigError(f"moving-average window {kind.window} exceeds input window")
        return inputs[:, -kind.window:].mean(axis=1)
    if isinstance(kind, LeastSquaresAR):
        return fit_ar(split.train, kind.order).predict(inputs)
    raise ConfigError(f"unknown baseline {kind!r}")


def run_baseline(kind, split):
    """Score a classical predictor on the raw (dBm) test pairs of ``split``."""
    if len(split.test) == 0:
        raise DataError("baseline needs a non-empty test set")
    t0 = time.perf_counter()
    if isinstance(kind, LeastSquaresAR):
        fit = fit_ar(split.train, kind.order)
        t1 = time.perf_counter()
        preds = fit.predict(split.test.inputs)
    else:
        t1 = t0
        preds = baseline_predict(kind, split)
    t2 = time.perf_counter()
    m = compute_metrics(preds, split.test.targets)
    m.train_seconds, m.test_seconds = t1 - t0, t2 - t1
    if isinstance(kind, LeastSquaresAR):
        m.param_count = kind.order + 1
    return m


# ---------------------------------------------------------------------------
# reports

REPORT_FIELDS = ("label", "mse_dbm2", "rmse_dbm", "n_pairs", "train_seconds", "test_seconds")


@dataclass
class Report:
    entries: list

    def to_dict(self):
        rows = []
        for label, m in self.entries:
            row = {"label": label, **m.scores(), **m.timings()}
            rows.append({k: row[k] for k in (*REPORT_FIELDS, "param_count") if k in row})
        return {"entries": rows}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc):
        try:
            entries = [
                (
                    e["label"],
                    Metrics(
                        mse=float(e["mse_dbm2"]),
                        rmse=float(e["rmse_dbm"]),
                        n_pairs=int(e["n_pairs"]),
                        train_seconds=float(e.get("train_seconds", 0.0)),
                        test_seconds=float(e.get("test_seconds", 0.0)),
                        param_count=e.get("param_count"),
                    ),
                )
                for e in doc["entries"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"malformed report document: {exc}") from exc
        return cls(entries)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_text(self):
        header = f"{'model':<24} {'MSE (dBm^2)':>12} {'RMSE (dBm)':>11} {'pairs':>7} " \
                 f"{'train (s)':>10} {'test (s)':>9} {'params':>7}"
        lines = [header, "-" * len(header)]
        for label, m in self.entries:
            params = "" if m.param_count is None else str(m.param_count)
            lines.append(
                f"{label:<24} {m.mse:>12.6f} {m.rmse:>11.6f} {m.n_pairs:>7d} "
                f"{m.train_seconds:>10.3f} {m.test_seconds:>9.4f} {params:>7}"
            )
        return "\n".join(lines) + "\n"


def compare_report(entries):
    """Table of ``(label, Metrics)`` rows, kept in the given order."""
    entries = list(entries)
    if not entries:
        raise DataError("report needs at least one entry")
    return Report(entries)


def metrics_to_dict(m):
    return asdict(m)
