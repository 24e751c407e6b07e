"""Figure generation for solver run directories."""

from .io import (
    ConvergenceTable,
    FormatError,
    LogTable,
    Snapshot,
    list_snapshots,
    read_log,
    read_meta,
    read_report,
    read_snapshot,
)
from .plots import FIELD_RANGE, PLOT_KINDS, fit_slope, plot_error_curves, plot_filmstrip, plot_mass_energy

__version__ = "0.1.0"
