"""Result models for dialogue-bt."""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import pandas as pd

from dialogue_bt.corpus.vocab import EOS_ID

PseudoOrigin = Literal["backward", "forward"]

TRACE_COLUMNS = ["iteration", "fwd_ppl", "bwd_ppl"]


@dataclass
class Hypothesis:
    """A partial or complete decoded sequence."""

    tokens: list[int]
    logprob: float
    state: Any = None
    finished: bool = False
    score: float | None = None
    group: int = 0

    @property
    def content(self) -> list[int]:
        """Tokens without the terminal EOS."""
        if self.tokens and self.tokens[-1] == EOS_ID:
            return self.tokens[:-1]
        return list(self.tokens)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "tokens": self.tokens,
            "logprob": self.logprob,
            "finished": self.finished,
            "score": self.score,
            "group": self.group,
        }


@dataclass
class PseudoPair:
    """Synthetic source produced by a frozen model for a real target."""

    source: list[int]
    target: list[int]
    origin: PseudoOrigin

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {"source": self.source, "target": self.target, "origin": self.origin}


@dataclass
class PhaseResult:
    """Outcome of one optimisation phase."""

    name: str
    steps: int = 0
    validation_history: list[float] = field(default_factory=list)
    stopped_early: bool = False
    pseudo_pairs: list[PseudoPair] = field(default_factory=list)

    @property
    def best_validation_loss(self) -> float | None:
        """Lowest validation loss seen, if any evaluation ran."""
        return min(self.validation_history) if self.validation_history else None

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "name": self.name,
            "steps": self.steps,
            "validation_history": self.validation_history,
            "best_validation_loss": self.best_validation_loss,
            "stopped_early": self.stopped_early,
            "pseudo_pairs": len(self.pseudo_pairs),
        }


@dataclass
class IterationTrace:
    """Validation perplexities per back-translation iteration; entry 0 is post-init."""

    fwd_ppl: list[float] = field(default_factory=list)
    bwd_ppl: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.fwd_ppl)

    def append(self, fwd: float, bwd: float) -> None:
        """Record one measurement."""
        self.fwd_ppl.append(float(fwd))
        self.bwd_ppl.append(float(bwd))

    def consecutive_fwd_increases(self) -> int:
        """Number of trailing iterations whose forward perplexity rose."""
        count = 0
        for k in range(len(self.fwd_ppl) - 1, 0, -1):
            if self.fwd_ppl[k] > self.fwd_ppl[k - 1]:
                count += 1
            else:
                break
        return count

    def to_frame(self) -> pd.DataFrame:
        """``iteration, fwd_ppl, bwd_ppl`` rows."""
        return pd.DataFrame(
            {
                "iteration": list(range(len(self))),
                "fwd_ppl": self.fwd_ppl,
                "bwd_ppl": self.bwd_ppl,
            },
            columns=TRACE_COLUMNS,
        )

    def to_csv(self, path: str | Path) -> Path:
        """Write the trace as CSV."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(target, index=False)
        return target

    @classmethod
    def from_csv(cls, path: str | Path) -> "IterationTrace":
        """Read a trace written by :meth:`to_csv`."""
        df = pd.read_csv(path)
        return cls(fwd_ppl=df["fwd_ppl"].astype(float).tolist(), bwd_ppl=df["bwd_ppl"].astype(float).tolist())


REPORT_SCHEMA = 1


@dataclass
class MetricsReport:
    """Automatic metrics for one model/decoding configuration."""

    system: str = "system"
    bleu2: float | None = None
    dist1: float | None = None
    dist2: float | None = None
    ent4: float | None = None
    adver: float | None = None
    ppl: float | None = None
    novel_rate: float | None = None
    copy_rate: float | None = None
    sample_count: int = 0
    config_fingerprint: str | None = None
    entropy_unit: str = "nats"
    schema: int = REPORT_SCHEMA

    def validate(self) -> None:
        """Check value ranges."""
        for name in ("bleu2", "dist1", "dist2", "adver", "novel_rate", "copy_rate"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.ent4 is not None and self.ent4 < 0:
            raise ValueError(f"ent4 must be non-negative, got {self.ent4}")
        if self.ppl is not None and (math.isnan(self.ppl) or self.ppl < 1.0):
            raise ValueError(f"ppl must be at least 1, got {self.ppl}")

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary in the fixed report key order."""
        return {
            "schema": self.schema,
            "system": self.system,
            "bleu2": self.bleu2,
            "dist1": self.dist1,
            "dist2": self.dist2,
            "ent4": self.ent4,
            "adver": self.adver,
            "ppl": self.ppl,
            "novel_rate": self.novel_rate,
            "copy_rate": self.copy_rate,
            "sample_count": self.sample_count,
            "entropy_unit": self.entropy_unit,
            "config_fingerprint": self.config_fingerprint,
        }
