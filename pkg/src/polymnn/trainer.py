"""Mini-batch Adam training with an MSE loss.

Runs are fully determined by ``TrainConfig.seed``: the same config and data
give bit-identical parameters and histories. There is no early stopping,
learning-rate schedule or gradient clipping; a NaN loss is recorded and
training carries on.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from . import metrics
from .autodiff import Graph, Node
from .dataset import Dataset


@dataclass
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 0.001
    batch_size: int = 32
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    validation_fraction: float = 0.2

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        if not 0 < self.validation_fraction < 1:
            raise ValueError("validation_fraction must lie in (0, 1)")


@dataclass
class TrainHistory:
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)
    val_rrse: list[float] = field(default_factory=list)
    val_r2: list[float] = field(default_factory=list)
    nan_epochs: list[int] = field(default_factory=list)

    def record(self, epoch, train_mse, val: metrics.MetricsReport):
        self.train_mse.append(float(train_mse))
        self.val_mse.append(val.mse)
        self.val_rrse.append(val.rrse)
        self.val_r2.append(val.r2)
        if not math.isfinite(train_mse) or val.has_nan:
            self.nan_epochs.append(epoch)

    def __len__(self):
        return len(self.train_mse)

    def rows(self):
        for k in range(len(self)):
            yield k + 1, self.train_mse[k], self.val_mse[k], self.val_rrse[k], self.val_r2[k]

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "train_mse", "val_mse", "val_rrse", "val_r2"])
            for epoch, *vals in self.rows():
                w.writerow([epoch] + [repr(v) for v in vals])


class Trainable(Protocol):
    params: dict[str, np.ndarray]

    def graph_forward(self, g: Graph, p: dict[str, Node], x: Node) -> Node: ...

    def predict(self, X) -> np.ndarray: ...


def mse_loss(y, y_hat) -> float:
    return metrics.mse(y, y_hat)


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls({k: np.zeros_like(a) for k, a in params.items()},
                   {k: np.zeros_like(a) for k, a in params.items()})


def adam_step(params, grads, state: AdamState, config: TrainConfig):
    """One bias-corrected Adam update, applied in place. Returns ``(params, state)``."""
    state.t += 1
    b1, b2 = config.adam_beta1, config.adam_beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    step = config.learning_rate
    for k, p in params.items():
        g = grads[k]
        m, v = state.m[k], state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= step * (m / c1) / (np.sqrt(v / c2) + config.adam_eps)
    return params, state


BatchLoss = Callable[[Graph, dict[str, Node], np.ndarray], Node]


def fit(params: dict[str, np.ndarray], batch_loss: BatchLoss, n_items: int, config: TrainConfig,
        validate: Callable[[], metrics.MetricsReport]) -> TrainHistory:
    """Generic epoch loop.

    ``batch_loss(graph, param_nodes, idx)`` must return a scalar loss node for
    the items ``idx``. Items are reshuffled each epoch with a seeded generator and
    the final short batch is kept. ``validate`` is called after every epoch.
    """
    if n_items < 1:
        raise ValueError("empty training set")
    rng = np.random.default_rng(config.seed)
    state = AdamState.zeros_like(params)
    history = TrainHistory()
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_items)
        total, seen = 0.0, 0
        for start in range(0, n_items, config.batch_size):
            idx = order[start:start + config.batch_size]
            g = Graph()
            with np.errstate(all="ignore"):
                loss = batch_loss(g, g.params(params), idx)
                grads = g.backward(loss)
                adam_step(params, grads, state, config)
            total += float(loss.value[0, 0]) * len(idx)
            seen += len(idx)
        history.record(epoch, total / seen, validate())
    return history


def train(model: Trainable, dataset: Dataset, config: TrainConfig):
    """Train a regression model in place; the last ``validation_fraction`` rows validate."""
    n_in = getattr(model, "n_i", dataset.n_features)
    if dataset.n_features != n_in:
        raise ValueError(f"dataset has {dataset.n_features} features, model expects {n_in}")
    if len(dataset) < 2:
        raise ValueError("need at least two samples (one to train, one to validate)")
    train_set, val_set = dataset.split_tail(config.validation_fraction)
    Xt = train_set.X.T
    Yt = train_set.y.reshape(len(train_set), -1).T

    def batch_loss(g, p, idx):
        out = model.graph_forward(g, p, g.leaf(Xt[:, idx]))
        return g.mse(out, Yt[:, idx])

    def validate():
        return metrics.evaluate(val_set.y, model.predict(val_set.X))

    history = fit(model.params, batch_loss, len(train_set), config, validate)
    return model, history
