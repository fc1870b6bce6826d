"""The training loop: shuffling, batching, target selection, backprop, Adam."""

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import ConfigError, DivergenceError
from .ndcore import as_matrix
from .sampling import TrainingMode, build_class_index, select_targets

_TARGET_STREAM = 0x7A17  # keeps target draws off the shuffle streams

LOSS_CEILING = 1e6


@dataclass
class TrainConfig:
    mode: TrainingMode
    learning_rate: float = 1e-3
    batch_size: int = 512
    epochs: int = 50
    seed: int = 0
    per_sample_flag: bool = False

    def __post_init__(self):
        problems = []
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            problems.append(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            problems.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if problems:
            raise ConfigError(problems)


@dataclass
class TrainReport:
    epoch_losses: list = field(default_factory=list)
    seconds: float = 0.0
    checksum: str = ""

    def to_jsonl(self):
        """One JSON object per epoch: {epoch, loss, seconds}."""
        per_epoch = self.seconds / max(len(self.epoch_losses), 1)
        lines = [
            json.dumps({"epoch": e, "loss": loss, "seconds": per_epoch})
            for e, loss in enumerate(self.epoch_losses)
        ]
        return "\n".join(lines) + "\n"

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


def epoch_shuffle(n, epoch, seed):
    """Deterministic permutation of [0, n) per (seed, epoch)."""
    if n < 1:
        raise ConfigError(f"cannot shuffle {n} rows")
    return np.random.default_rng([seed, epoch]).permutation(n)


def param_checksum(net):
    return hashlib.sha256(net.param_bytes()).hexdigest()


def train(net, data, labels, cfg):
    """Train `net` in place; returns (net, TrainReport).

    Deterministic for a fixed (net, data, labels, cfg): shuffles and target
    draws use seed-derived streams. Labels are only consulted in icrst mode,
    so standard/trst trajectories are label-independent.
    """
    data = as_matrix(data)
    if data.shape[0] == 0:
        raise ConfigError("cannot train on an empty dataset")
    if cfg.mode.needs_labels and labels is None:
        raise ConfigError("icrst mode requires labels")

    class_index = build_class_index(labels) if cfg.mode.needs_labels else None
    target_rng = np.random.default_rng([cfg.seed, _TARGET_STREAM])
    state = nn.AdamState.for_network(net)

    n = data.shape[0]
    report = TrainReport()
    t0 = time.perf_counter()
    step = 0
    for epoch in range(cfg.epochs):
        perm = epoch_shuffle(n, epoch, cfg.seed)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, cfg.batch_size):
            batch_rows = perm[start:start + cfg.batch_size]
            target_rows = select_targets(
                batch_rows, labels, cfg.mode, class_index, n, target_rng,
                per_sample=cfg.per_sample_flag,
            )
            batch = data[batch_rows]
            target = data[target_rows]
            loss, grads = nn.loss_and_gradients(net, batch, target)
            if not np.isfinite(loss) or loss > LOSS_CEILING:
                raise DivergenceError(step, loss)
            nn.optimizer_step(net, grads, state, cfg.learning_rate)
            epoch_loss += loss
            n_batches += 1
            step += 1
        report.epoch_losses.append(epoch_loss / n_batches)
    report.seconds = time.perf_counter() - t0
    report.checksum = param_checksum(net)
    return net, report
