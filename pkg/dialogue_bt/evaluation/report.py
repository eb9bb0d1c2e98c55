"""Metrics report emission and Table-style comparison export."""

import json
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from dialogue_bt.corpus.vocab import EOS_ID, PAD_ID
from dialogue_bt.evaluation.metrics import bleu2, dist_n, ent_n
from dialogue_bt.exceptions import RejectedInputError, UndefinedMetricError
from dialogue_bt.log import get_logger
from dialogue_bt.models.results import REPORT_SCHEMA, MetricsReport

logger = get_logger(__name__)

TABLE_COLUMNS = ["system", "bleu2", "dist1", "dist2", "ent4", "adver"]

Tokens = Sequence[str] | Sequence[int]


def _defined(fn, *args) -> float | None:  # type: ignore[no-untyped-def]
    try:
        return float(fn(*args))
    except UndefinedMetricError as exc:
        logger.warning("metric_undefined", metric=getattr(fn, "__name__", "metric"), reason=str(exc))
        return None


def text_metrics(
    hypotheses: Sequence[Tokens],
    references: Sequence[Tokens] | None = None,
    system: str = "system",
) -> MetricsReport:
    """BLEU-2 (when references are given), Dist-1/2 and Ent-4 of one set of generations.

    Undefined diversity metrics (too few tokens) are left as None.
    """
    if not hypotheses:
        raise RejectedInputError("no hypotheses to evaluate")
    report = MetricsReport(system=system, sample_count=len(hypotheses))
    if references is not None:
        report.bleu2 = bleu2(hypotheses, references)
    report.dist1 = _defined(dist_n, hypotheses, 1)
    report.dist2 = _defined(dist_n, hypotheses, 2)
    report.ent4 = _defined(ent_n, hypotheses, 4)
    return report


def report_to_json(report: MetricsReport) -> str:
    """Serialise with the fixed key order and a trailing newline."""
    report.validate()
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def emit_report(report: MetricsReport, path: str | Path) -> Path:
    """Write ``report`` as JSON (schema 1).

    Raises:
        OSError: ``path`` cannot be written.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(report_to_json(report), encoding="utf-8")
    logger.info("report_written", path=str(target), system=report.system)
    return target


def load_report(path: str | Path) -> MetricsReport:
    """Read a report written by :func:`emit_report`."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("schema") != REPORT_SCHEMA:
        raise RejectedInputError(f"{path}: unsupported report schema {data.get('schema')!r}")
    return MetricsReport(**data)


def reports_frame(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    """One row per report, columns in comparison-table order."""
    rows = [{col: r.to_dict()[col] for col in TABLE_COLUMNS} for r in reports]
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def export_table(reports: Sequence[MetricsReport], path: str | Path) -> Path:
    """Write the comparison table as CSV; missing metrics become empty cells."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    reports_frame(reports).to_csv(target, index=False)
    return target


def strip_specials(ids: Sequence[int]) -> list[int]:
    """Drop PAD and a terminal EOS from a decoded id sequence."""
    out = [int(i) for i in ids if int(i) != PAD_ID]
    if out and out[-1] == EOS_ID:
        out.pop()
    return out
