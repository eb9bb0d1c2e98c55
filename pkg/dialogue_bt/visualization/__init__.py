"""Visualization package for dialogue-bt."""

from dialogue_bt.visualization.comparison import MetricsComparisonViz
from dialogue_bt.visualization.iteration_trace import IterationTraceViz

__all__ = ["IterationTraceViz", "MetricsComparisonViz"]
