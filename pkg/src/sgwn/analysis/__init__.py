"""Envelope-spectrum interpretation and experiment harnesses."""

from .harness import accuracy_is_monotone, depth_sweep, hyperparam_sweep, noise_sweep
from .report import line_plot, read_csv, write_csv, write_json
from .ses import (
    LocateReport,
    SesResult,
    analytic_signal,
    feature_ses_report,
    locate_fault_frequency,
    squared_envelope_spectrum,
)

__all__ = [
    "LocateReport",
    "SesResult",
    "accuracy_is_monotone",
    "analytic_signal",
    "depth_sweep",
    "feature_ses_report",
    "hyperparam_sweep",
    "line_plot",
    "locate_fault_frequency",
    "noise_sweep",
    "read_csv",
    "squared_envelope_spectrum",
    "write_csv",
    "write_json",
]
