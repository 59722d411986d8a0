"""Training loop for the U-Net regressor.

The optimized objective is 0.5 * MSE plus an L2 penalty on weights
(biases are not regularized); the reported loss is RMSE of the same
residual.  Both have the same minimizers, and MSE keeps the gradient
finite at zero residual.  Gradients are clipped to a global L2 norm
before the Adam update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch

from .bev import BevBlock
from .unet import UNetModel

__all__ = [
    "TrainConfig",
    "TrainState",
    "FitResult",
    "TrainingDiverged",
    "loss",
    "train_step",
    "fit",
    "write_loss_csv",
]


class TrainingDiverged(RuntimeError):
    """Raised when a step produces a non-finite loss or gradient."""


@dataclass(frozen=True)
class TrainConfig:
    """Optimization hyper-parameters.

    Defaults are the reference operating point (single epoch, single
    sample batches, lr 1e-6, L2 1e-4, momentum 0.9, clip norm 1.0).
    desk_scale() raises the learning rate and epoch count for small
    synthetic runs, where one pass at 1e-6 cannot move the weights
    meaningfully.
    """

    lr: float = 1e-6
    l2: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    grad_clip_norm: float = 1.0
    clip_mode: str = "global_norm"
    epochs: int = 1
    batch_size: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr < 0:
            raise ValueError("lr must be >= 0")
        for name in ("l2", "beta1", "beta2", "eps_adam", "grad_clip_norm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.beta1 >= 1 or self.beta2 >= 1:
            raise ValueError("betas must be < 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.clip_mode not in ("global_norm", "element"):
            raise ValueError(f"unknown clip_mode {self.clip_mode!r}")

    @classmethod
    def desk_scale(cls, **overrides) -> "TrainConfig":
        base = dict(lr=1e-3, epochs=8)
        base.update(overrides)
        return cls(**base)


@dataclass
class TrainState:
    """Optimizer plus step counter, carried across train_step calls."""

    optimizer: torch.optim.Adam
    step: int = 0


@dataclass(frozen=True)
class FitResult:
    model: UNetModel
    curve: tuple[tuple[int, int, float], ...]  # (step, epoch, rmse)


def _as_tensor(x, dtype: torch.dtype) -> torch.Tensor:
    if isinstance(x, BevBlock):
        x = x.pixels
    arr = np.ascontiguousarray(x)
    if not arr.flags.writeable:  # rendered images are frozen
        arr = arr.copy()
    t = torch.from_numpy(arr).to(dtype)
    if t.ndim == 3:
        t = t.unsqueeze(0)
    if t.ndim != 4:
        raise ValueError(f"expected (C,H,W) or (B,C,H,W), got {tuple(t.shape)}")
    return t


def loss(pred, target) -> float:
    """Reported loss: RMSE over all pixels and channels."""
    p = pred.pixels if isinstance(pred, BevBlock) else np.asarray(pred)
    t = target.pixels if isinstance(target, BevBlock) else np.asarray(target)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    d = p.astype(np.float64) - t.astype(np.float64)
    return math.sqrt(float(np.mean(d * d)))


def init_state(model: UNetModel, cfg: TrainConfig) -> TrainState:
    opt = torch.optim.Adam(
        model.parameters(),
        lr=cfg.lr,
        betas=(cfg.beta1, cfg.beta2),
        eps=cfg.eps_adam,
        weight_decay=0.0,
    )
    return TrainState(optimizer=opt)


def objective(model: UNetModel, pred: torch.Tensor, target: torch.Tensor, cfg: TrainConfig) -> torch.Tensor:
    """The differentiated quantity: half-MSE plus weights-only L2."""
    mse = torch.mean((pred - target) ** 2)
    reg = pred.new_zeros(())
    for p in model.parameters():
        if p.ndim > 1:
            reg = reg + (p * p).sum()
    return 0.5 * mse + 0.5 * cfg.l2 * reg


def _clip_gradients(model: UNetModel, cfg: TrainConfig) -> None:
    grads = [p.grad for p in model.parameters() if p.grad is not None]
    if cfg.clip_mode == "element":
        for g in grads:
            g.clamp_(-cfg.grad_clip_norm, cfg.grad_clip_norm)
        return
    total = math.sqrt(sum(float((g.double() ** 2).sum()) for g in grads))
    if total > cfg.grad_clip_norm:
        scale = cfg.grad_clip_norm / total
        for g in grads:
            g.mul_(scale)


def train_step(
    model: UNetModel,
    sample: tuple,
    cfg: TrainConfig,
    state: TrainState | None = None,
) -> tuple[UNetModel, TrainState, float]:
    """One optimization step on a sample (or pre-stacked batch).

    Returns the updated model and state along with the reported RMSE
    of the forward pass before the update.
    """
    if state is None:
        state = init_state(model, cfg)
    dtype = next(model.parameters()).dtype
    inp = _as_tensor(sample[0], dtype)
    tgt = _as_tensor(sample[1], dtype)

    state.optimizer.zero_grad(set_to_none=True)
    pred = model(inp)
    mse = torch.mean((pred - tgt) ** 2)
    obj = objective(model, pred, tgt, cfg)
    obj_val = float(obj.detach())
    if not math.isfinite(obj_val):
        raise TrainingDiverged(f"step {state.step}: non-finite loss {obj_val}")
    obj.backward()
    for name, p in model.named_parameters():
        if p.grad is not None and not bool(torch.isfinite(p.grad).all()):
            raise TrainingDiverged(f"step {state.step}: non-finite gradient in {name}")
    _clip_gradients(model, cfg)
    state.optimizer.step()
    state.step += 1
    return model, state, math.sqrt(float(mse.detach()))


def fit(
    model: UNetModel,
    dataset,
    cfg: TrainConfig,
    checkpoint_every: int | None = None,
    checkpoint_path: str | None = None,
) -> FitResult:
    """Train over epochs x dataset with seeded shuffling.

    dataset is any indexable sequence of (input, target) pairs; items
    are fetched one batch at a time, so lazily-encoding datasets keep
    memory flat.  The loss curve records (global step, epoch, RMSE).
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    from .unet import save_checkpoint  # local import to avoid cycle at module load

    state = init_state(model, cfg)
    rng = np.random.default_rng(cfg.seed)
    curve: list[tuple[int, int, float]] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(dataset))
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            pairs = [dataset[int(i)] for i in idx]
            inp = np.stack(
                [p[0].pixels if isinstance(p[0], BevBlock) else np.asarray(p[0]) for p in pairs]
            )
            tgt = np.stack(
                [p[1].pixels if isinstance(p[1], BevBlock) else np.asarray(p[1]) for p in pairs]
            )
            model, state, rmse = train_step(model, (inp, tgt), cfg, state)
            curve.append((state.step, epoch, rmse))
            if (
                checkpoint_every
                and checkpoint_path
                and state.step % checkpoint_every == 0
            ):
                save_checkpoint(model, checkpoint_path)
    if checkpoint_path:
        save_checkpoint(model, checkpoint_path)
    return FitResult(model=model, curve=tuple(curve))


def write_loss_csv(curve, path: str) -> None:
    """Emit the loss curve as CSV with full-precision loss values."""
    with open(path, "w", newline="") as f:
        f.write("step,epoch,loss\n")
        for step, epoch, value in curve:
            f.write(f"{step},{epoch},{value!r}\n")
