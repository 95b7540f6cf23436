"""Simulation sweeps, monotonicity and clustering reports, real-data protocols."""
from .analysis import (ClusterReport, MonotonicityReport, cross_measure_correlation,
                       cross_measure_correlation_from, monotonicity,
                       monotonicity_from_trajectories)
from .selection import SelectionTable, lagged_ci_sweep, variable_selection
from .sweep import ExperimentSpec, SweepFailed, SweepTable, run_sweep

__all__ = [
    "ClusterReport", "ExperimentSpec", "MonotonicityReport", "SelectionTable", "SweepFailed",
    "SweepTable", "cross_measure_correlation", "cross_measure_correlation_from",
    "lagged_ci_sweep", "monotonicity", "monotonicity_from_trajectories", "run_sweep",
    "variable_selection",
]
