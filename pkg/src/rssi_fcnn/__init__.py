"""Fully connected RSSI channel estimators built on numpy.

Model A predicts the next RSSI sample from a window of 10; Model B predicts
the mean RSSI at the next measurement location from the previous two.
"""

__version__ = "0.1.0"

from .chansim import ChannelParams, SweepSpec, simulate_location_sweep, simulate_stationary_trace
from .data import (
    RssiTrace,
    SplitDataset,
    WindowedDataset,
    average_locations,
    average_readings,
    load_csv_trace,
    make_windows,
    temporal_split,
)
from .errors import (
    ConfigError,
    DataError,
    FileAccessError,
    LoadError,
    NumericError,
    RssiError,
    ShapeError,
)
from .evaluation import LeastSquaresAR, MovingAverage, Persistence, compute_metrics, run_baseline
from .models import ModelConfig, build_model, evaluate, prepare_model_a, prepare_model_b, train
from .nn import Network, backward, forward, load_network, param_count, save_network
from .optim import NadamHyper, NadamState, gradient_check, nadam_step
