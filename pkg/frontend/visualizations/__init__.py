"""Visualization utilities."""

from frontend.visualizations.convergence_plots import convergence_figure, table_figure

__all__ = ["convergence_figure", "table_figure"]
