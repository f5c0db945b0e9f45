"""Minibatch training loop shared by all learners."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..autodiff import Adam, Tape, clip_global_norm
from ..exceptions import DivergenceError
from .nets import ParamStore


@dataclass
class TrainRecord:
    step: int
    action_nll: float
    kl: float
    total: float

    def as_row(self) -> str:
        return f"{self.step},{self.action_nll!r},{self.kl!r},{self.total!r}"


CURVE_HEADER = "step,action_nll,kl,total"


def cosine_lr(base: float, step: int, total: int, floor_fraction: float = 0.1) -> float:
    if total <= 1:
        return base
    progress = min(1.0, step / (total - 1))
    floor = floor_fraction * base
    return floor + 0.5 * (base - floor) * (1.0 + math.cos(math.pi * progress))


def run_training(store: ParamStore, loss_fn, steps: int, learning_rate: float,
                 grad_clip: float, start_step: int = 0, adam: Adam | None = None,
                 on_step=None, lr_schedule: str = "cosine") -> tuple[list[TrainRecord], Adam]:
    """Drive `loss_fn(step) -> {action_nll, kl, total}` for `steps` updates.

    Aborts with a diagnostic if any loss goes non-finite.  Returns the loss
    curve and the optimizer (whose moments checkpoint for exact resume).
    """
    if adam is None:
        adam = Adam(store.params, lr=learning_rate)
    records: list[TrainRecord] = []
    for step in range(start_step, steps):
        if lr_schedule == "cosine":
            adam.lr = cosine_lr(learning_rate, step, steps)
        with Tape() as tape:
            losses = loss_fn(step)
            total = losses["total"]
        total_value = total.item()
        if not math.isfinite(total_value):
            raise DivergenceError(
                f"training diverged at step {step}: total loss {total_value}")
        kl = losses.get("kl")
        record = TrainRecord(
            step=step,
            action_nll=losses["action_nll"].item(),
            kl=0.0 if kl is None else kl.item(),
            total=total_value,
        )
        tape.backward(total)
        clip_global_norm(store.params, grad_clip)
        adam.step()
        adam.zero_grad()
        records.append(record)
        if on_step is not None:
            on_step(record)
    return records, adam
