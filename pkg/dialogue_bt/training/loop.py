"""Generic optimisation loop with patience-based early stopping."""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from dialogue_bt.log import get_logger
from dialogue_bt.models.results import PhaseResult
from dialogue_bt.models.schemas import BtConfig, OptimConfig
from dialogue_bt.numcore import tensor as T
from dialogue_bt.numcore.optim import Adam
from dialogue_bt.numcore.tensor import Parameter, Tape, Tensor

logger = get_logger(__name__)


@dataclass
class EarlyStopper:
    """Stops after ``patience`` evaluations without a relative improvement of ``epsilon``."""

    epsilon: float
    patience: int
    best: float = math.inf
    bad_evaluations: int = 0
    history: list[float] = field(default_factory=list)

    def update(self, value: float) -> bool:
        """Record a validation loss; returns True when training should stop."""
        self.history.append(value)
        if math.isinf(self.best) or value < self.best * (1.0 - self.epsilon):
            self.best = value
            self.bad_evaluations = 0
        else:
            self.bad_evaluations += 1
        return self.bad_evaluations >= self.patience


def fit(
    name: str,
    params: Sequence[Parameter],
    step_loss: Callable[[], Tensor],
    validate: Callable[[], float],
    optim: OptimConfig,
    config: BtConfig,
) -> PhaseResult:
    """Minimise ``step_loss`` over ``params`` until validation stops improving.

    Adam moments of ``params`` are reset first, so each call starts a fresh phase.

    Args:
        name: Phase label for logs and the result.
        params: The only parameters updated.
        step_loss: Draws the next batch and returns its scalar loss.
        validate: Held-out loss, evaluated every ``config.eval_every`` steps and at the end.
        optim: Adam settings.
        config: Step budget and convergence rule.

    Returns:
        PhaseResult with the step count and validation history.
    """
    optimizer = Adam(
        params,
        learning_rate=optim.learning_rate,
        beta1=optim.beta1,
        beta2=optim.beta2,
        eps=optim.eps,
        max_grad_norm=optim.max_grad_norm,
    )
    optimizer.reset()
    optimizer.zero_grad()
    stopper = EarlyStopper(config.conv_epsilon, config.patience)
    result = PhaseResult(name=name)
    logger.info("phase_started", phase=name, max_steps=config.max_steps_per_phase)

    for step in range(1, config.max_steps_per_phase + 1):
        with Tape() as tape:
            loss = step_loss()
        T.backward(tape, loss)
        optimizer.step()
        result.steps = step
        if step % config.eval_every == 0 or step == config.max_steps_per_phase:
            value = validate()
            logger.info("validation", phase=name, step=step, loss=value, train_loss=loss.item())
            if stopper.update(value):
                result.stopped_early = step < config.max_steps_per_phase
                if result.stopped_early:
                    logger.info("early_stop", phase=name, reason="patience", step=step)
                break

    result.validation_history = list(stopper.history)
    logger.info("phase_finished", phase=name, steps=result.steps, best=result.best_validation_loss)
    return result
