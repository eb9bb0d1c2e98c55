"""Pydantic configuration schemas."""

import hashlib
import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from dialogue_bt.exceptions import ConfigError
from dialogue_bt.numcore.optim import PUBLISHED_LEARNING_RATE

# ============================================
# Model Schemas
# ============================================


class ModelConfig(BaseModel):
    """Dimensions of the LSTM encoder/decoder stacks.

    Published sizes are embed 300, hidden 500, 2 layers, max_len 50; the defaults here
    are desk-scale.
    """

    model_config = ConfigDict(extra="forbid")

    vocab_size: int = Field(8, ge=4, description="Vocabulary size including 4 special ids")
    embed_dim: int = Field(32, ge=1)
    hidden_dim: int = Field(64, ge=1)
    num_layers: int = Field(2, ge=1)
    max_len: int = Field(50, ge=2, description="Maximum tokens per sequence")


class OptimConfig(BaseModel):
    """Adam and clipping settings."""

    model_config = ConfigDict(extra="forbid")

    learning_rate: float = Field(0.01, ge=0, description=f"Published value: {PUBLISHED_LEARNING_RATE}")
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    eps: float = Field(1e-8, gt=0)
    max_grad_norm: float = Field(5.0, gt=0)


# ============================================
# Training Schemas
# ============================================


class BtConfig(BaseModel):
    """Training-loop settings shared by every regime."""

    model_config = ConfigDict(extra="forbid")

    num_iterations: int = Field(4, ge=0, description="Backward/forward rounds")
    pseudo_beam_size: int = Field(5, ge=1)
    batch_size: int = Field(16, ge=1, description="Published value: 256")
    conv_epsilon: float = Field(1e-3, gt=0, description="Relative improvement threshold")
    patience: int = Field(3, ge=1)
    eval_every: int = Field(200, ge=1)
    max_steps_per_phase: int = Field(2000, ge=0)
    validation_size: int = Field(64, ge=1)
    regression_patience: int = Field(2, ge=1)
    mixing_ratio: float = Field(0.5, gt=0, lt=1, description="Autoencoder batch fraction")
    rng_seed: int = Field(0, ge=0)


# ============================================
# Decoding Schemas
# ============================================


Strategy = Literal["greedy", "beam", "diverse_beam", "nucleus", "fused", "mmi"]


class DecodeConfig(BaseModel):
    """Decoding strategy and its hyperparameters."""

    model_config = ConfigDict(extra="forbid")

    strategy: Strategy = "beam"
    beam_size: int = Field(5, ge=1)
    max_len: int = Field(50, ge=1)
    nucleus_p: float = Field(0.9, gt=0, le=1)
    num_groups: int = Field(5, ge=1)
    diversity_strength: float = Field(0.3, ge=0)
    fusion_alpha: float = Field(0.5, ge=0, le=1)
    mmi_lambda: float = Field(0.5, ge=0)
    mmi_candidates: int = Field(200, ge=1)
    rng_seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _groups_within_beam(self) -> "DecodeConfig":
        if self.strategy == "diverse_beam" and self.num_groups > self.beam_size:
            raise ValueError("num_groups must not exceed beam_size")
        return self


# ============================================
# Corpus Schemas
# ============================================


class FilterConfig(BaseModel):
    """Utterance filtering rules."""

    model_config = ConfigDict(extra="forbid")

    min_tokens: int = Field(10, gt=0)
    max_tokens: int = Field(30, gt=0)
    blocklist: list[str] = Field(default_factory=list)
    min_likes: int | None = Field(None, ge=0, description="Published value: 10")

    @model_validator(mode="after")
    def _ordered_bounds(self) -> "FilterConfig":
        if self.min_tokens > self.max_tokens:
            raise ValueError("min_tokens must not exceed max_tokens")
        return self


class SynthSpec(BaseModel):
    """Synthetic diversity-gap corpus description."""

    model_config = ConfigDict(extra="forbid")

    num_pairs: int = Field(400, ge=0)
    num_monologues: int = Field(400, ge=0)
    num_topics: int = Field(6, ge=1)
    generic_ratio: float = Field(0.8, ge=0, le=1, description="Share of generic responses")
    gap: float = Field(1.0, ge=0, description="Required Ent-4 gap in nats")


class CorpusPaths(BaseModel):
    """Input files and preparation settings."""

    model_config = ConfigDict(extra="forbid")

    paired: str | None = None
    mono: str | None = None
    blocklist: str | None = None
    min_count: int = Field(5, ge=1)
    valid_fraction: float = Field(0.1, ge=0, lt=1)
    test_fraction: float = Field(0.1, ge=0, lt=1)


# ============================================
# Run Configuration
# ============================================


class RunConfig(BaseSettings):
    """Complete resolved configuration for one command."""

    model_config = SettingsConfigDict(
        extra="forbid",
        env_prefix="DIALOGUE_BT_",
        env_nested_delimiter="__",
    )

    model: ModelConfig = Field(default_factory=ModelConfig)
    optim: OptimConfig = Field(default_factory=OptimConfig)
    trainer: BtConfig = Field(default_factory=BtConfig)
    decode: DecodeConfig = Field(default_factory=DecodeConfig)
    filter: FilterConfig = Field(default_factory=FilterConfig)
    synth: SynthSpec = Field(default_factory=SynthSpec)
    corpus: CorpusPaths = Field(default_factory=CorpusPaths)
    seed: int = Field(0, ge=0)
    output_dir: str = "runs/default"

    def canonical_json(self, exclude: set[str] | None = None) -> str:
        """Sorted-key JSON used for fingerprints and artifact snapshots."""
        return json.dumps(self.model_dump(mode="json", exclude=exclude), sort_keys=True, indent=2)

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON without ``output_dir``.

        Two runs of the same configuration in different directories share a fingerprint.
        """
        payload = self.canonical_json(exclude={"output_dir"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(
    path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """Build a RunConfig from an optional JSON file plus nested overrides.

    Raises:
        ConfigError: Unreadable file or any validation failure.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a JSON object")
    if overrides:
        data = _deep_merge(data, overrides)
    try:
        return RunConfig(**data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
