"""Figure scripts over qtomo run manifests and timing CSVs.

This package only reads the tomography engine's published file formats
(JSON manifests, timing CSVs); it never imports the engine itself.
"""

__version__ = "0.1.0"

from .figures import (load_manifest, load_timing_csv, mse_boxplot_data,
                      plot_mse_boxplots, plot_runtime, runtime_series)

__all__ = [
    "load_manifest",
    "load_timing_csv",
    "mse_boxplot_data",
    "plot_mse_boxplots",
    "plot_runtime",
    "runtime_series",
]
