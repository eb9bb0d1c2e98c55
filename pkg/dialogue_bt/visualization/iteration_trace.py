"""Validation perplexity across back-translation iterations."""

from pathlib import Path

import pandas as pd
import plotly.graph_objects as go

from dialogue_bt.models.results import IterationTrace


class IterationTraceViz:
    """Line charts of an :class:`IterationTrace`.

    Iteration 0 is the initialised pair before any back translation.
    """

    def create_trace_chart(
        self,
        trace: IterationTrace | pd.DataFrame,
        title: str = "Validation Perplexity Across Iterations",
    ) -> go.Figure:
        """Create a chart with one line per direction.

        Args:
            trace: The trace, or its ``to_frame()`` DataFrame.
            title: Figure title.

        Returns:
            Plotly figure object.
        """
        df = trace.to_frame() if isinstance(trace, IterationTrace) else trace

        fig = go.Figure()
        fig.add_trace(
            go.Scatter(
                x=df["iteration"],
                y=df["fwd_ppl"],
                mode="lines+markers",
                name="Forward (context to response)",
                line=dict(color="blue"),
            )
        )
        fig.add_trace(
            go.Scatter(
                x=df["iteration"],
                y=df["bwd_ppl"],
                mode="lines+markers",
                name="Backward (response to context)",
                line=dict(color="red", dash="dash"),
            )
        )

        fig.update_layout(
            title=title,
            xaxis_title="Iteration",
            yaxis_title="Pseudo-pair perplexity",
            xaxis=dict(tickmode="linear", dtick=1),
            hovermode="x unified",
        )

        return fig

    def write_html(self, fig: go.Figure, path: str | Path) -> Path:
        """Write a standalone HTML file with plotly.js inlined."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fig.write_html(str(target), include_plotlyjs=True, full_html=True)
        return target
