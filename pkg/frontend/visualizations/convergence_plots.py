"""Plotly figures for convergence reports and experiment tables.

Figures are supplementary: the CSV tables next to them carry the numbers.
"""

import logging
from typing import Optional

import numpy as np
import pandas as pd
import plotly.graph_objects as go

logger = logging.getLogger(__name__)


def convergence_figure(report, title: Optional[str] = None) -> go.Figure:
    """
    Log-log plot of e(ε) with the fitted line over the included points.

    Args:
        report: ConvergenceReport
        title: Figure title

    Returns:
        plotly Figure
    """
    frame = report.to_frame()
    figure = go.Figure()
    for included, label in ((True, "fitted"), (False, "excluded")):
        subset = frame[frame["included_in_fit"] == included]
        if subset.empty:
            continue
        figure.add_trace(
            go.Scatter(
                x=subset["eps"],
                y=subset["error"],
                mode="markers",
                name=label,
                marker={"symbol": "circle" if included else "x"},
            )
        )
    if np.isfinite(report.slope):
        eps = np.asarray(frame["eps"][frame["included_in_fit"]], dtype=float)
        figure.add_trace(
            go.Scatter(
                x=eps,
                y=np.exp(report.intercept) * eps**report.slope,
                mode="lines",
                name=f"slope {report.slope:.3f}",
            )
        )
    figure.update_xaxes(type="log", title="ε")
    figure.update_yaxes(type="log", title=f"e(ε) [{report.metric}]")
    figure.update_layout(title=title or f"Convergence ({report.reference} reference)")
    logger.debug(f"Convergence figure: {len(frame)} points")
    return figure


def table_figure(frame: pd.DataFrame, x: str, y: str, title: str, log: bool = True) -> go.Figure:
    """Line plot of one column against another."""
    figure = go.Figure(go.Scatter(x=frame[x], y=frame[y], mode="lines+markers", name=y))
    if log:
        figure.update_xaxes(type="log")
        figure.update_yaxes(type="log")
    figure.update_layout(title=title, xaxis_title=x, yaxis_title=y)
    return figure
