"""Side-by-side diversity metrics for several systems."""

from collections.abc import Sequence

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from dialogue_bt.evaluation.report import reports_frame
from dialogue_bt.models.results import MetricsReport

METRIC_LABELS = {
    "bleu2": "BLEU-2",
    "dist1": "Dist-1",
    "dist2": "Dist-2",
    "ent4": "Ent-4",
    "adver": "Adver",
}


class MetricsComparisonViz:
    """Grouped bar charts over metric reports."""

    def create_metrics_chart(
        self,
        reports: Sequence[MetricsReport] | pd.DataFrame,
        metrics: Sequence[str] = ("dist1", "dist2", "ent4"),
    ) -> go.Figure:
        """Create one bar group per metric with a bar per system.

        Metrics that a report left undefined are omitted for that system.

        Args:
            reports: Reports, or a frame from :func:`reports_frame`.
            metrics: Columns to plot.

        Returns:
            Plotly figure object.
        """
        df = reports if isinstance(reports, pd.DataFrame) else reports_frame(reports)
        long = df.melt(id_vars="system", value_vars=list(metrics), var_name="metric").dropna()
        long["metric"] = long["metric"].map(METRIC_LABELS)

        fig = px.bar(
            long,
            x="metric",
            y="value",
            color="system",
            barmode="group",
            title="Diversity by System",
            labels={"metric": "Metric", "value": "Value", "system": "System"},
        )

        return fig
