"""Temporal clustering of appliance usage for anticipatory control.

Bins daily event logs into a density prototype, agglomerates populated bins
with a reach picked by a percolation sweep, and evaluates the resulting
on-schedules against baselines.
"""
from .core import Cluster, DensityPrototype, EventLog, Mode, bin_events, read_event_log, write_event_log
from .errors import EmptyInputError, EmptySystemError, InsufficientDataError, InvalidPeriodError, ParseError, TCAError
from .tca import PercolationTrace, ThresholdParams, cluster_fixed, percolation_sweep, run_tca, select_threshold, tca

__all__ = [
    "Cluster",
    "DensityPrototype",
    "EventLog",
    "Mode",
    "bin_events",
    "read_event_log",
    "write_event_log",
    "TCAError",
    "EmptyInputError",
    "EmptySystemError",
    "InsufficientDataError",
    "InvalidPeriodError",
    "ParseError",
    "PercolationTrace",
    "ThresholdParams",
    "cluster_fixed",
    "percolation_sweep",
    "run_tca",
    "select_threshold",
    "tca",
]

__version__ = "0.1.0"
