"""Three-network SIR metamodel with a softmax coupling.

Each compartment has its own MNN taking ``(s, i, r, beta, gamma)``; the three
scalar outputs are passed jointly through a softmax, so every predicted state
is a valid set of fractions. Training is teacher-forced (true states as
inputs); evaluation rolls the model forward on its own predictions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import metrics, mnn, sir
from .autodiff import Graph, Node
from .trainer import TrainConfig, TrainHistory, fit

COMPARTMENTS = ("s", "i", "r")
N_FEATURES = 5


class StepModel(Protocol):
    """Anything that maps ``(N, 5)`` features to ``(N, 3)`` next states at a fixed lag."""

    lag: int

    def predict_batch(self, X: np.ndarray) -> np.ndarray: ...


@dataclass
class SirMetamodel:
    net_s: mnn.MnnModel
    net_i: mnn.MnnModel
    net_r: mnn.MnnModel
    lag: int

    def __post_init__(self):
        shapes = {(n.kind, n.n_i, n.n_h, n.n_o, n.n_order) for n in self.nets}
        if len(shapes) != 1:
            raise ValueError("the three compartment networks must share kind, sizes and order")
        if self.net_s.n_i != N_FEATURES or self.net_s.n_o != 1:
            raise ValueError("compartment networks take 5 inputs and give 1 output")

    @property
    def nets(self) -> tuple[mnn.MnnModel, mnn.MnnModel, mnn.MnnModel]:
        return self.net_s, self.net_i, self.net_r

    @property
    def kind(self) -> str:
        return self.net_s.kind

    @property
    def order(self) -> int:
        return self.net_s.n_order

    @property
    def param_count(self) -> int:
        return sum(mnn.param_count(n) for n in self.nets)

    @property
    def params(self) -> dict[str, np.ndarray]:
        """Flat view (shared arrays) with compartment-prefixed names."""
        return {f"{c}.{k}": a for c, net in zip(COMPARTMENTS, self.nets) for k, a in net.params.items()}

    def graph_forward(self, g: Graph, p: dict[str, Node], x: Node) -> Node:
        outs = []
        for c, net in zip(COMPARTMENTS, self.nets):
            sub = {k.split(".", 1)[1]: v for k, v in p.items() if k.startswith(c + ".")}
            outs.append(net.graph_forward(g, sub, x))
        return g.softmax(g.concat(outs))

    def predict_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        g = Graph()
        with np.errstate(all="ignore"):
            return self.graph_forward(g, g.params(self.params), g.leaf(X.T)).value.T


def build_metamodel(kind: str, L: int, rng=None, n_h: int = 64) -> SirMetamodel:
    if L < 1:
        raise ValueError("lag must be at least 1")
    kind = kind.upper()
    if kind not in mnn.KINDS:
        raise ValueError(f"unknown MNN kind {kind!r}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    order = sir.polynomial_order_for_lag(L)
    nets = [mnn.build(kind, N_FEATURES, n_h, 1, order, rng) for _ in COMPARTMENTS]
    return SirMetamodel(*nets, lag=L)


def predict_next(model: StepModel, state: sir.SirState, beta: float, gamma: float) -> np.ndarray:
    """Next state as an array ``(s, i, r)``; NaN if any network output is NaN."""
    x = np.array([[state.s, state.i, state.r, beta, gamma]])
    return model.predict_batch(x)[0]


def rollout_many(model: StepModel, x0, beta, gamma, steps: int, record_inputs: bool = False):
    """Autoregressive predictions ``(N, steps, 3)`` from ``(N, 3)`` starting states.

    Returns ``(predictions, first_nan_step)`` where ``first_nan_step[n]`` is the
    step index at which simulation ``n`` first went non-finite, or -1. With
    ``record_inputs`` the ``(N, steps, 5)`` inputs are returned as a third item.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    x = np.asarray(x0, dtype=np.float64).reshape(-1, 3)
    n = x.shape[0]
    rates = np.stack([np.broadcast_to(beta, (n,)), np.broadcast_to(gamma, (n,))], axis=-1).astype(np.float64)
    preds = np.empty((n, steps, 3))
    inputs = np.empty((n, steps, 5)) if record_inputs else None
    for k in range(steps):
        feats = np.concatenate([x, rates], axis=1)
        if record_inputs:
            inputs[:, k] = feats
        x = model.predict_batch(feats)
        preds[:, k] = x
    bad = ~np.all(np.isfinite(preds), axis=2)
    first_nan = np.where(bad.any(axis=1), bad.argmax(axis=1), -1)
    if record_inputs:
        return preds, first_nan, inputs
    return preds, first_nan


def rollout(model: StepModel, state0: sir.SirState, beta: float, gamma: float, steps: int) -> np.ndarray:
    """Predicted states ``(steps, 3)`` after ``state0``; rates stay fixed."""
    preds, _ = rollout_many(model, state0.as_array()[None, :], beta, gamma, steps)
    return preds[0]


def evaluate_rollout(model: StepModel, sims: sir.SimulationSet, nan_policy: str = "propagate") -> metrics.MetricsReport:
    """Roll out every simulation and score against the stride-``lag`` truth.

    Metrics are computed per compartment over all (simulation, step) pairs and
    then averaged over the three compartments.
    """
    if len(sims) == 0:
        raise ValueError("no simulations to evaluate")
    truth = sims.modeled(model.lag)
    preds, _ = rollout_many(model, truth[:, 0], sims.beta, sims.gamma, truth.shape[1] - 1)
    per = [metrics.evaluate(truth[:, 1:, c], preds[:, :, c], nan_policy) for c in range(3)]
    return metrics.mean_report(per)


def rollout_rows(model: StepModel, sims: sir.SimulationSet):
    """Rows ``sim_id,k,s_pred,i_pred,r_pred,s_true,i_true,r_true`` for CSV export."""
    truth = sims.modeled(model.lag)
    preds, _ = rollout_many(model, truth[:, 0], sims.beta, sims.gamma, truth.shape[1] - 1)
    for n in range(len(sims)):
        for k in range(preds.shape[1]):
            yield [n, k + 1, *preds[n, k].tolist(), *truth[n, k + 1].tolist()]


def train_teacher_forced(meta: SirMetamodel, sims: sir.SimulationSet, config: TrainConfig,
                         input_log: list | None = None) -> tuple[SirMetamodel, TrainHistory]:
    """Fit on ground-truth lag pairs; mini-batches are groups of whole simulations.

    The loss is the sum over compartments of the MSE between softmax outputs
    and true next states. The last ``validation_fraction`` of simulations is held
    out and scored by rollout after every epoch.
    """
    n_val = min(max(int(round(len(sims) * config.validation_fraction)), 1), len(sims) - 1)
    if len(sims) < 2:
        raise ValueError("need at least two simulations")
    train_sims = sims.subset(slice(0, len(sims) - n_val))
    val_sims = sims.subset(slice(len(sims) - n_val, None))
    X, Y = train_sims.pairs(meta.lag)
    params = meta.params

    def batch_loss(g, p, idx):
        xb = X[idx].reshape(-1, N_FEATURES)
        if input_log is not None:
            input_log.append(xb)
        out = meta.graph_forward(g, p, g.leaf(xb.T))
        return g.mse(out, Y[idx].reshape(-1, 3).T, reduction="sum_rows")

    history = fit(params, batch_loss, len(train_sims), config, lambda: evaluate_rollout(meta, val_sims))
    return meta, history


class OracleStep:
    """Ground-truth ``L``-fold step, packaged like a metamodel (for harness checks)."""

    def __init__(self, lag: int):
        self.lag = lag

    def predict_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        x = X[:, :3]
        for _ in range(self.lag):
            x = sir.step_array(x, X[:, 3], X[:, 4])
        return x
