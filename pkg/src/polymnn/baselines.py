"""Reference regressors: average, least squares, ReLU MLP and tree ensembles.

The tree ensembles are thin wrappers over scikit-learn with their
hyperparameters pinned (see ``RF_PARAMS`` and ``GB_PARAMS``), so a run does not
depend on whatever the installed library defaults to. Every fitted model can be
dumped to plain JSON and evaluated again without scikit-learn.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .autodiff import Graph, Node
from .dataset import Dataset
from .trainer import TrainConfig, TrainHistory, fit

KINDS = ("AVG", "LR", "FFNN_RELU", "RF", "GB")

RF_PARAMS = {"n_estimators": 100, "max_depth": None, "bootstrap": True, "max_features": 1.0,
             "criterion": "squared_error"}
GB_PARAMS = {"n_estimators": 100, "max_depth": 3, "learning_rate": 0.1, "loss": "squared_error",
             "criterion": "squared_error", "subsample": 1.0}
RIDGE = 1e-10


class NotFittedError(RuntimeError):
    pass


@dataclass
class BaselineModel:
    """A fitted reference model. ``state`` holds kind-specific parameters."""

    kind: str
    n_features: int
    state: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    # fitted library estimator for fast prediction; trees are exported on demand
    impl: object = field(default=None, repr=False, compare=False)

    def predict(self, X) -> np.ndarray:
        return predict(self, X)


def _rows(X, n_features=None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1) if n_features is None or X.size == n_features else X.reshape(-1, 1)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    return X


def _need_data(dataset: Dataset):
    if len(dataset) == 0:
        raise ValueError("cannot fit on an empty dataset")


# -- average ---------------------------------------------------------------
def fit_average(dataset: Dataset) -> BaselineModel:
    _need_data(dataset)
    return BaselineModel("AVG", dataset.n_features, {"mean": float(np.mean(dataset.y))})


# -- linear regression -----------------------------------------------------
def fit_linear_regression(dataset: Dataset) -> BaselineModel:
    """OLS with intercept via the normal equations.

    A singular (or numerically singular) Gram matrix engages a tiny ridge term;
    ``flags["ridge_fallback"]`` records that this happened.
    """
    _need_data(dataset)
    n, k = dataset.X.shape
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} samples for {k} features, got {n}")
    A = np.hstack([dataset.X, np.ones((n, 1))])
    G = A.T @ A
    rhs = A.T @ dataset.y
    fallback = np.linalg.cond(G) > 1e12
    if not fallback:
        try:
            coef = np.linalg.solve(G, rhs)
        except np.linalg.LinAlgError:
            fallback = True
    if fallback:
        coef = np.linalg.solve(G + RIDGE * np.eye(k + 1), rhs)
    return BaselineModel("LR", k, {"weights": coef[:-1].tolist(), "intercept": float(coef[-1])},
                         {"ridge_fallback": bool(fallback)})


# -- ReLU feed-forward network ---------------------------------------------
@dataclass
class ReluNet:
    """Plain MLP: affine -> ReLU for each hidden layer, then a linear output."""

    n_i: int
    layers: tuple[int, ...]
    params: dict[str, np.ndarray]

    @property
    def depth(self) -> int:
        return len(self.layers) + 1

    def graph_forward(self, g: Graph, p: dict[str, Node], x: Node) -> Node:
        h = x
        for k in range(self.depth):
            h = g.affine(p[f"W{k}"], p[f"b{k}"], h)
            if k < self.depth - 1:
                h = g.relu(h)
        return h

    def predict(self, X) -> np.ndarray:
        X = _rows(X, self.n_i)
        g = Graph()
        with np.errstate(all="ignore"):
            return self.graph_forward(g, g.params(self.params), g.leaf(X.T)).value[0]


def build_relu_net(n_i: int, layers=(64, 64), rng=None) -> ReluNet:
    if n_i < 1 or not layers or min(layers) < 1:
        raise ValueError("need n_i >= 1 and at least one positive hidden width")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    sizes = [n_i, *layers, 1]
    params = {}
    for k, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        # He-uniform keeps ReLU activations from dying out at init
        bound = np.sqrt(6.0 / a)
        params[f"W{k}"] = rng.uniform(-bound, bound, size=(b, a))
        params[f"b{k}"] = np.zeros((b, 1))
    return ReluNet(n_i, tuple(layers), params)


def fit_relu_ffnn(dataset: Dataset, layers=(64, 64), config: TrainConfig | None = None,
                  validation: Dataset | None = None) -> tuple[BaselineModel, TrainHistory]:
    """Train a ReLU MLP with the shared Adam loop on all rows of ``dataset``.

    ``validation`` (optional) is scored after every epoch.
    """
    _need_data(dataset)
    config = config or TrainConfig()
    rng = np.random.default_rng([config.seed, 1])
    net = build_relu_net(dataset.n_features, tuple(layers), rng)
    Xt = dataset.X.T
    yt = dataset.y[None, :]

    def batch_loss(g, p, idx):
        return g.mse(net.graph_forward(g, p, g.leaf(Xt[:, idx])), yt[:, idx])

    def validate():
        ref = validation if validation is not None else dataset
        return metrics.evaluate(ref.y, net.predict(ref.X))

    history = fit(net.params, batch_loss, len(dataset), config, validate)
    state = {"layers": list(net.layers), "params": {k: v.tolist() for k, v in net.params.items()}}
    return BaselineModel("FFNN_RELU", dataset.n_features, state), history


# -- tree ensembles --------------------------------------------------------
def _export_tree(tree) -> dict:
    """Flatten a fitted sklearn tree into parallel arrays; leaves have feature -1."""
    t = tree.tree_
    return {"feature": t.feature.tolist(), "threshold": t.threshold.tolist(),
            "left": t.children_left.tolist(), "right": t.children_right.tolist(),
            "value": t.value[:, 0, 0].tolist()}


def predict_tree(tree: dict, X: np.ndarray) -> np.ndarray:
    # the fitting library compares single-precision inputs against its thresholds
    with np.errstate(over="ignore"):
        X = X.astype(np.float32)
    feature = np.asarray(tree["feature"])
    threshold = np.asarray(tree["threshold"])
    left, right = np.asarray(tree["left"]), np.asarray(tree["right"])
    value = np.asarray(tree["value"])
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = feature[node] >= 0
    while active.any():
        rows = np.nonzero(active)[0]
        f = feature[node[rows]]
        go_left = X[rows, f] <= threshold[node[rows]]
        node[rows] = np.where(go_left, left[node[rows]], right[node[rows]])
        active = feature[node] >= 0
    return value[node]


def _forest_seed(seed) -> int:
    return int(np.random.SeedSequence([int(seed), 2]).generate_state(1)[0])


def fit_random_forest(dataset: Dataset, seed: int = 0, **overrides) -> BaselineModel:
    """Bagged regression trees; prediction is the plain mean over trees.

    ``overrides`` replace entries of ``RF_PARAMS`` (e.g. ``max_depth=1``).
    """
    from sklearn.ensemble import RandomForestRegressor

    _need_data(dataset)
    params = {**RF_PARAMS, **overrides}
    model = RandomForestRegressor(random_state=_forest_seed(seed), n_jobs=1, **params)
    model.fit(dataset.X, dataset.y)
    return BaselineModel("RF", dataset.n_features, {"params": params}, impl=model)


def fit_gradient_boosting(dataset: Dataset, seed: int = 0, **overrides) -> BaselineModel:
    """Stagewise boosting of depth-3 trees on residuals, shrinkage 0.1."""
    from sklearn.ensemble import GradientBoostingRegressor

    _need_data(dataset)
    params = {**GB_PARAMS, **overrides}
    model = GradientBoostingRegressor(random_state=_forest_seed(seed), **params)
    model.fit(dataset.X, dataset.y)
    return BaselineModel("GB", dataset.n_features, {"learning_rate": params["learning_rate"], "params": params},
                         impl=model)


def export_trees(model: BaselineModel) -> dict:
    """Full state of a tree ensemble in the plain JSON tree format."""
    st = dict(model.state)
    if "trees" in st or model.impl is None:
        return st
    est = model.impl
    if model.kind == "RF":
        st["trees"] = [_export_tree(t) for t in est.estimators_]
    else:
        st["init"] = float(est.init_.constant_[0, 0])
        st["trees"] = [_export_tree(t) for t in est.estimators_[:, 0]]
    return st


# -- shared entry points ---------------------------------------------------
def fit_baseline(kind: str, dataset: Dataset, seed: int = 0, config: TrainConfig | None = None,
                 validation: Dataset | None = None) -> BaselineModel:
    kind = kind.upper()
    if kind == "AVG":
        return fit_average(dataset)
    if kind == "LR":
        return fit_linear_regression(dataset)
    if kind == "RF":
        return fit_random_forest(dataset, seed)
    if kind == "GB":
        return fit_gradient_boosting(dataset, seed)
    if kind == "FFNN_RELU":
        return fit_relu_ffnn(dataset, config=config, validation=validation)[0]
    raise ValueError(f"unknown baseline {kind!r}; choose from {KINDS}")


def predict(model: BaselineModel, X) -> np.ndarray:
    if model is None or not model.state:
        raise NotFittedError("baseline has not been fitted")
    X = _rows(X, model.n_features)
    st = model.state
    if model.kind == "AVG":
        return np.full(X.shape[0], st["mean"])
    if model.kind == "LR":
        return X @ np.asarray(st["weights"]) + st["intercept"]
    if model.impl is not None and model.kind in ("RF", "GB"):
        return model.impl.predict(X)
    if model.kind == "RF":
        return np.mean([predict_tree(t, X) for t in st["trees"]], axis=0)
    if model.kind == "GB":
        out = np.full(X.shape[0], st["init"])
        for t in st["trees"]:
            out += st["learning_rate"] * predict_tree(t, X)
        return out
    if model.kind == "FFNN_RELU":
        net = ReluNet(model.n_features, tuple(st["layers"]),
                      {k: np.asarray(v, dtype=np.float64) for k, v in st["params"].items()})
        return net.predict(X)
    raise ValueError(f"unknown baseline kind {model.kind!r}")


def to_json(model: BaselineModel) -> str:
    return json.dumps({"format": "polymnn.baseline/1", "kind": model.kind, "n_features": model.n_features,
                       "state": export_trees(model) if model.kind in ("RF", "GB") else model.state, "flags": model.flags})


def from_json(text: str) -> BaselineModel:
    d = json.loads(text)
    if d.get("format") != "polymnn.baseline/1":
        raise ValueError("not a baseline document")
    return BaselineModel(d["kind"], d["n_features"], d["state"], d.get("flags", {}))
