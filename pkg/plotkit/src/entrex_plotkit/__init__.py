"""entrex-plotkit: violin and curve figures from entrex benchmark CSVs."""

__version__ = "0.1.0"

from .render import BENCHMARK_GROUPS, PlotSpec, RenderError, render

__all__ = ["BENCHMARK_GROUPS", "PlotSpec", "RenderError", "render", "__version__"]
