"""Multiplicative neural networks: PANN, CCP, PDCLow and PDC.

All four map an input ``z`` of size ``n_i`` to an output of size ``n_o`` through
a hidden width ``n_h`` and produce a polynomial of degree ``n_order`` in ``z``:

* PANN    ``C (U z)^n + c``  (integer power activation)
* CCP     ``x_1 = U_1 z``; ``x_d = (U_d z) * x_{d-1} + x_{d-1}``; ``C x_n + c``
* PDCLow  ``C sum_d prod_j (U_{d,j} z) + c``
* PDC     ``C sum_d V_d(prod_j (U_{d,j} z)) + c``

Every U, V and C layer carries a bias.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Graph, Node

KINDS = ("PANN", "CCP", "PDCLOW", "PDC")


@dataclass
class MnnModel:
    kind: str
    n_i: int
    n_h: int
    n_o: int
    n_order: int
    params: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def graph_forward(self, g: Graph, p: dict[str, Node], x: Node) -> Node:
        """Record the forward pass of a ``(n_i, B)`` batch on ``g``."""
        if x.shape[0] != self.n_i:
            raise ValueError(f"expected {self.n_i} input features, got {x.shape[0]}")
        n = self.n_order
        if self.kind == "PANN":
            h = g.pow(g.affine(p["U"], p["U_b"], x), n)
        elif self.kind == "CCP":
            h = g.affine(p["U1"], p["U1_b"], x)
            for d in range(2, n + 1):
                u = g.affine(p[f"U{d}"], p[f"U{d}_b"], x)
                h = g.add(g.hadamard(u, h), h)
        elif self.kind == "PDCLOW":
            h = g.add(*[g.affine_product(p[f"U{d}"], p[f"U{d}_b"], x) for d in range(1, n + 1)])
        elif self.kind == "PDC":
            h = g.add(*[
                g.affine(p[f"V{d}"], p[f"V{d}_b"], g.affine_product(p[f"U{d}"], p[f"U{d}_b"], x))
                for d in range(1, n + 1)
            ])
        else:
            raise ValueError(f"unknown MNN kind {self.kind!r}")
        return g.affine(p["C"], p["C_b"], h)

    def forward(self, x) -> np.ndarray:
        """Evaluate on a single vector ``(n_i,)`` or a column batch ``(n_i, B)``."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if x.shape[0] != self.n_i:
            raise ValueError(f"expected {self.n_i} input features, got {x.shape[0]}")
        g = Graph()
        with np.errstate(all="ignore"):
            out = self.graph_forward(g, g.params(self.params), g.leaf(x)).value
        return out[:, 0] if single else out

    def predict(self, X) -> np.ndarray:
        """Row-major convenience wrapper: ``(N, n_i) -> (N, n_o)``."""
        X = np.asarray(X, dtype=np.float64)
        return self.forward(X.T).T

    @property
    def param_count(self) -> int:
        return param_count(self)


def _layer(rng, fan_in, fan_out, stack=None):
    bound = 1.0 / math.sqrt(fan_in)
    shape = (fan_out, fan_in) if stack is None else (stack, fan_out, fan_in)
    W = rng.uniform(-bound, bound, size=shape)
    b = np.zeros(shape[:-1] + (1,))
    return W, b


def _validate(n_i, n_h, n_o, n_order):
    for name, v in (("n_i", n_i), ("n_h", n_h), ("n_o", n_o), ("n_order", n_order)):
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v}")


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def build_pann(n_i, n_h=64, n_o=1, n_order=1, rng=None) -> MnnModel:
    _validate(n_i, n_h, n_o, n_order)
    rng = _rng(rng)
    p = {}
    p["U"], p["U_b"] = _layer(rng, n_i, n_h)
    p["C"], p["C_b"] = _layer(rng, n_h, n_o)
    return MnnModel("PANN", n_i, n_h, n_o, n_order, p)


def build_ccp(n_i, n_h=64, n_o=1, n_order=1, rng=None) -> MnnModel:
    _validate(n_i, n_h, n_o, n_order)
    rng = _rng(rng)
    p = {}
    for d in range(1, n_order + 1):
        p[f"U{d}"], p[f"U{d}_b"] = _layer(rng, n_i, n_h)
    p["C"], p["C_b"] = _layer(rng, n_h, n_o)
    return MnnModel("CCP", n_i, n_h, n_o, n_order, p)


def build_pdclow(n_i, n_h=64, n_o=1, n_order=1, rng=None) -> MnnModel:
    _validate(n_i, n_h, n_o, n_order)
    rng = _rng(rng)
    p = {}
    for d in range(1, n_order + 1):
        p[f"U{d}"], p[f"U{d}_b"] = _layer(rng, n_i, n_h, stack=d)
    p["C"], p["C_b"] = _layer(rng, n_h, n_o)
    return MnnModel("PDCLOW", n_i, n_h, n_o, n_order, p)


def build_pdc(n_i, n_h=64, n_o=1, n_order=1, rng=None) -> MnnModel:
    _validate(n_i, n_h, n_o, n_order)
    rng = _rng(rng)
    p = {}
    for d in range(1, n_order + 1):
        p[f"U{d}"], p[f"U{d}_b"] = _layer(rng, n_i, n_h, stack=d)
        p[f"V{d}"], p[f"V{d}_b"] = _layer(rng, n_h, n_h)
    p["C"], p["C_b"] = _layer(rng, n_h, n_o)
    return MnnModel("PDC", n_i, n_h, n_o, n_order, p)


BUILDERS = {"PANN": build_pann, "CCP": build_ccp, "PDCLOW": build_pdclow, "PDC": build_pdc}


def build(kind: str, n_i, n_h=64, n_o=1, n_order=1, rng=None) -> MnnModel:
    try:
        builder = BUILDERS[kind.upper()]
    except KeyError:
        raise ValueError(f"unknown MNN kind {kind!r}; expected one of {KINDS}") from None
    return builder(n_i, n_h, n_o, n_order, rng)


def param_count(model: MnnModel) -> int:
    """Number of scalars actually stored in the model."""
    return int(sum(a.size for a in model.params.values()))


def expected_param_count(kind: str, n_i: int, n_h: int, n_o: int, n_order: int) -> int:
    """Closed-form parameter count for each architecture."""
    u = n_i * n_h + n_h
    out = n_h * n_o + n_o
    kind = kind.upper()
    if kind == "PANN":
        return u + out
    if kind == "CCP":
        return n_order * u + out
    tri = n_order * (n_order + 1) // 2
    if kind == "PDCLOW":
        return tri * u + out
    if kind == "PDC":
        return tri * u + n_order * (n_h * n_h + n_h) + out
    raise ValueError(f"unknown MNN kind {kind!r}")


def format_count(n: int) -> str:
    """Abbreviate a parameter count the way the results tables do.

    Counts are truncated (not rounded): one decimal below 100 units, none above.
    ``1347 -> '1.3K'``, ``3651 -> '3.6K'``, ``138435 -> '138K'``, ``2322627 -> '2.3M'``.
    """
    if n < 1000:
        return str(n)
    unit, div = ("M", 10**6) if n >= 10**6 else ("K", 10**3)
    if n >= 100 * div:
        return f"{n // div}{unit}"
    tenths = n * 10 // div
    return f"{tenths // 10}.{tenths % 10}{unit}"


# -- serialization ------------------------------------------------------------

def to_json(model: MnnModel) -> str:
    """Self-describing JSON; arrays are little-endian float64 bytes in hex."""
    doc = {
        "format": "polymnn.mnn/1",
        "kind": model.kind,
        "n_i": model.n_i,
        "n_h": model.n_h,
        "n_o": model.n_o,
        "n_order": model.n_order,
        "layers": {
            name: {"shape": list(a.shape), "float64_le_hex": np.ascontiguousarray(a, dtype="<f8").tobytes().hex()}
            for name, a in model.params.items()
        },
    }
    return json.dumps(doc)


def from_json(text: str) -> MnnModel:
    doc = json.loads(text)
    params = {
        name: np.frombuffer(bytes.fromhex(layer["float64_le_hex"]), dtype="<f8")
        .reshape(layer["shape"]).astype(np.float64)
        for name, layer in doc["layers"].items()
    }
    return MnnModel(doc["kind"], doc["n_i"], doc["n_h"], doc["n_o"], doc["n_order"], params)
