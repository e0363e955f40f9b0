from .figures import KINDS, PlotSpec, plot
from .io import SchemaError, read_eigenvalues, read_farfield, read_grid, read_run_records

__all__ = ["KINDS", "PlotSpec", "plot", "SchemaError", "read_eigenvalues",
           "read_farfield", "read_grid", "read_run_records"]
