"""RSSI traces, averaging, sliding windows, temporal splits and scaling."""

import csv
import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, FileAccessError, LoadError, ShapeError

DEFAULT_COLUMN = "rssi_dbm"


class Scenario(str, Enum):
    STATIONARY = "stationary"
    LOCATION_SWEEP = "location_sweep"


class Condition(str, Enum):
    LOS = "los"
    NLOS = "nlos"


@dataclass(frozen=True)
class RssiTrace:
    """Time-ordered RSSI samples in dBm."""

    samples: np.ndarray
    scenario: Scenario = Scenario.STATIONARY
    condition: Condition = Condition.LOS
    source: str = ""

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64).ravel()
        if s.size == 0:
            raise DataError("trace has no samples")
        if not np.all(np.isfinite(s)):
            raise DataError(f"trace contains non-finite values at {np.flatnonzero(~np.isfinite(s))[:5].tolist()}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "condition", Condition(self.condition))

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class LocationSet:
    """Raw samples per measurement location, in physical measurement order."""

    labels: tuple
    samples: tuple
    condition: Condition = Condition.LOS
    source: str = ""

    def __post_init__(self):
        if len(self.labels) != len(self.samples):
            raise ShapeError(f"{len(self.labels)} labels for {len(self.samples)} sample groups")
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(
            self, "samples", tuple(np.asarray(s, dtype=np.float64).ravel() for s in self.samples)
        )

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True)
class WindowedDataset:
    """``inputs[i]`` is a window of consecutive samples, ``targets[i]`` the next one."""

    window: int
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=np.float64).reshape(-1, self.window)
        y = np.asarray(self.targets, dtype=np.float64).ravel()
        if x.shape[0] != y.shape[0]:
            raise ShapeError(f"{x.shape[0]} input windows for {y.shape[0]} targets")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)

    def __len__(self):
        return self.targets.size

    @property
    def pairs(self):
        return list(zip(self.inputs, self.targets))

    def slice(self, start, stop=None):
        return WindowedDataset(self.window, self.inputs[start:stop], self.targets[start:stop])


@dataclass(frozen=True)
class Normalizer:
    """z-score transform with statistics pooled over train inputs and targets."""

    mean: float
    std: float

    def apply(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def invert(self, z):
        return np.asarray(z, dtype=np.float64) * self.std + self.mean

    def transform(self, ds):
        return WindowedDataset(ds.window, self.apply(ds.inputs), self.apply(ds.targets))


@dataclass(frozen=True)
class SplitDataset:
    train: WindowedDataset
    test: WindowedDataset
    normalizer: Normalizer = None

    @property
    def window(self):
        return self.train.window


# ---------------------------------------------------------------------------
# ingestion


def _read_rows(path):
    path = Path(path)
    if not path.is_file():
        raise FileAccessError(f"{path}: no such file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = None
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [h.strip() for h in row]
            else:
                rows.append((reader.line_num, row))
    if header is None:
        raise LoadError(f"{path}: file is empty")
    return header, rows


def _column(header, name, path):
    if name not in header:
        raise LoadError(f"{path}: column {name!r} not found (have {header})")
    return header.index(name)


def _parse_float(cell, path, lineno, name):
    try:
        val = float(cell)
    except ValueError:
        raise LoadError(f"{path}: line {lineno}: non-numeric {name} value {cell!r}") from None
    if not math.isfinite(val):
        raise LoadError(f"{path}: line {lineno}: non-finite {name} value {cell!r}")
    return val


def load_csv_trace(path, column=DEFAULT_COLUMN, condition=Condition.LOS):
    """Read one RSSI column from a CSV file; file order is the time order."""
    header, rows = _read_rows(path)
    idx = _column(header, column, path)
    values = []
    for lineno, row in rows:
        if idx >= len(row):
            raise LoadError(f"{path}: line {lineno}: missing {column} cell")
        values.append(_parse_float(row[idx], path, lineno, column))
    if not values:
        raise LoadError(f"{path}: no data rows")
    return RssiTrace(np.array(values), Scenario.STATIONARY, condition, source=str(path))


def load_readings(paths, column=DEFAULT_COLUMN, condition=Condition.LOS):
    """Load several aligned reading files and average them sample-by-sample."""
    traces = [load_csv_trace(p, column, condition) for p in paths]
    avg = average_readings([t.samples for t in traces])
    return replace(avg, condition=condition, source=";".join(str(p) for p in paths))


def load_location_csv(path, column=DEFAULT_COLUMN, label_column="location_label",
                      condition=Condition.LOS):
    """Group rows by label, ordered by each label's first appearance."""
    header, rows = _read_rows(path)
    li = _column(header, label_column, path)
    vi = _column(header, column, path)
    groups = {}
    for lineno, row in rows:
        if max(li, vi) >= len(row):
            raise LoadError(f"{path}: line {lineno}: too few cells")
        groups.setdefault(row[li].strip(), []).append(_parse_float(row[vi], path, lineno, column))
    if not groups:
        raise LoadError(f"{path}: no data rows")
    return LocationSet(tuple(groups), tuple(groups.values()), condition, source=str(path))


def write_trace_csv(trace, path, column=DEFAULT_COLUMN):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", column])
        for t, v in enumerate(trace.samples):
            w.writerow([t, repr(float(v))])


def write_locations_csv(ls, path, column=DEFAULT_COLUMN):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["location_label", column])
        for label, samples in zip(ls.labels, ls.samples):
            for v in samples:
                w.writerow([label, repr(float(v))])


# ---------------------------------------------------------------------------
# preprocessing


def average_readings(readings, condition=Condition.LOS):
    """Average equal-length readings at every time step."""
    if len(readings) == 0:
        raise DataError("need at least one reading")
    lengths = {len(r) for r in readings}
    if len(lengths) != 1:
        raise ShapeError(f"readings have unequal lengths {sorted(lengths)}")
    stacked = np.asarray(readings, dtype=np.float64)
    return RssiTrace(stacked.mean(axis=0), Scenario.STATIONARY, condition,
                     source=f"mean of {len(readings)} readings")


def average_locations(ls):
    """One mean RSSI value per location, in location order."""
    means = []
    for label, s in zip(ls.labels, ls.samples):
        if s.size == 0:
            raise DataError(f"location {label!r} has no samples")
        means.append(s.mean())
    if not means:
        raise DataError("location set is empty")
    return RssiTrace(np.array(means), Scenario.LOCATION_SWEEP, ls.condition,
                     source=ls.source or "location means")


def make_windows(trace, window):
    """Stride-1 sliding windows: ``samples[i:i+W] -> samples[i+W]``."""
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    s = trace.samples if isinstance(trace, RssiTrace) else np.asarray(trace, dtype=np.float64)
    n = max(0, s.size - window)
    if n == 0:
        return WindowedDataset(window, np.empty((0, window)), np.empty(0))
    inputs = np.lib.stride_tricks.sliding_window_view(s, window)[:n].copy()
    return WindowedDataset(window, inputs, s[window:].copy())


def temporal_split(ds, train_fraction=0.8, *, n_train=None, n_test=None):
    """Split windows in time order; no shuffling.

    By default the first ``floor(train_fraction * len(ds))`` pairs train and
    the rest test.  ``n_train`` sets the boundary as an explicit pair count
    instead, and ``n_test`` caps how many pairs after it are kept for testing.
    """
    if len(ds) == 0:
        raise DataError("cannot split an empty dataset")
    if n_train is None:
        if not 0.0 < train_fraction <= 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1], got {train_fraction}")
        n_train = math.floor(train_fraction * len(ds))
    if not 0 <= n_train <= len(ds):
        raise ConfigError(f"n_train={n_train} outside [0, {len(ds)}]")
    stop = None if n_test is None else n_train + n_test
    if stop is not None and (n_test < 0 or stop > len(ds)):
        raise ConfigError(f"n_test={n_test} does not fit after {n_train} training pairs")
    return SplitDataset(ds.slice(0, n_train), ds.slice(n_train, stop))


def location_split(ds, train_locations=8, test_locations=2):
    """Split a location-mean window dataset by target location.

    Pairs whose target lies among the first ``train_locations`` locations train;
    the next ``test_locations`` targets test; anything later is held out.
    """
    n_train = train_locations - ds.window
    if n_train < 1:
        raise ConfigError(
            f"{train_locations} training locations leave no pairs for window {ds.window}"
        )
    return temporal_split(ds, n_train=n_train, n_test=test_locations)


def fit_normalizer(train):
    """Population mean/std over every training input and target value."""
    if len(train) == 0:
        raise DataError("cannot fit a normalizer on an empty training set")
    pool = np.concatenate([train.inputs.ravel(), train.targets])
    mean = float(pool.mean())
    std = float(pool.std())
    if std == 0.0:
        std = 1.0
    return Normalizer(mean, std)


def with_normalizer(split, normalizer=None):
    """Attach ``normalizer`` (fitted on ``split.train`` when omitted)."""
    return replace(split, normalizer=normalizer or fit_normalizer(split.train))


# ---------------------------------------------------------------------------
# dataset files

DATASET_FORMAT = "rssi-fcnn/dataset"


def split_to_dict(split):
    """Raw (dBm) train/test pairs; a normalizer, if any, is listed separately."""
    def part(ds):
        return {"inputs": ds.inputs.tolist(), "targets": ds.targets.tolist()}

    norm = split.normalizer
    return {
        "format": DATASET_FORMAT,
        "version": 1,
        "window": split.window,
        "train": part(split.train),
        "test": part(split.test),
        "normalizer": None if norm is None else {"mean": norm.mean, "std": norm.std},
    }


def normalizer_from_dict(doc):
    if doc is None:
        return None
    try:
        mean, std = float(doc["mean"]), float(doc["std"])
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"malformed normalizer: {exc}") from exc
    if not (math.isfinite(mean) and math.isfinite(std) and std > 0):
        raise LoadError(f"invalid normalizer mean={mean} std={std}")
    return Normalizer(mean, std)


def split_from_dict(doc):
    try:
        if doc.get("format") != DATASET_FORMAT:
            raise LoadError(f"not a dataset document (format={doc.get('format')!r})")
        window = int(doc["window"])
        parts = []
        for name in ("train", "test"):
            inputs = np.asarray(doc[name]["inputs"], dtype=np.float64).reshape(-1, window)
            parts.append(WindowedDataset(window, inputs, doc[name]["targets"]))
        norm = normalizer_from_dict(doc.get("normalizer"))
    except LoadError:
        raise
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"malformed dataset document: {exc}") from exc
    return SplitDataset(parts[0], parts[1], norm)


def save_split(split, path, extra=None):
    doc = split_to_dict(split)
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_split(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise FileAccessError(f"{path}: {exc.strerror or exc}") from exc
    return split_from_dict(doc)
