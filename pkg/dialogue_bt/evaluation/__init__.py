"""Evaluation: corpus diversity metrics, model-based scores and reports."""

from dialogue_bt.evaluation.metrics import NGramTable, bleu2, dist_n, ent_n, ngrams
from dialogue_bt.evaluation.model_metrics import (
    ADVER_THRESHOLD,
    adver_score,
    mean_token_nll,
    perplexity,
    summed_nll,
)
from dialogue_bt.evaluation.novelty import novelty_rates
from dialogue_bt.evaluation.report import (
    TABLE_COLUMNS,
    emit_report,
    export_table,
    load_report,
    reports_frame,
    text_metrics,
)

__all__ = [
    "ADVER_THRESHOLD",
    "NGramTable",
    "TABLE_COLUMNS",
    "adver_score",
    "bleu2",
    "dist_n",
    "emit_report",
    "ent_n",
    "export_table",
    "load_report",
    "mean_token_nll",
    "ngrams",
    "novelty_rates",
    "perplexity",
    "reports_frame",
    "summed_nll",
    "text_metrics",
]
