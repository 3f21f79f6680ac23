"""Small reverse-mode automatic differentiation engine on float64 numpy arrays.

A :class:`Graph` is a tape. Every operation appends a :class:`Node` holding its
value and a closure that pushes the node's adjoint to its parents. Batches are
laid out as matrices of column vectors, so a feature vector of length ``n``
evaluated on ``B`` samples is an ``(n, B)`` array.

NaN and Inf are never masked here; they flow through forward and backward
passes untouched.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class Node:
    __slots__ = ("id", "op", "parents", "value", "grad", "name", "_backward")

    def __init__(self, id, op, parents, value, backward=None, name=None):
        self.id = id
        self.op = op
        self.parents = parents
        self.value = value
        self.grad = None  # lazily zero
        self.name = name
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    @property
    def adjoint(self) -> np.ndarray:
        return np.zeros_like(self.value) if self.grad is None else self.grad

    def __repr__(self):
        return f"Node(id={self.id}, op={self.op!r}, shape={self.value.shape})"


def _accumulate(node: Node, g: np.ndarray) -> None:
    node.grad = g if node.grad is None else node.grad + g


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


class Graph:
    """Dynamic computation graph, rebuilt for every forward pass."""

    def __init__(self):
        self.nodes: list[Node] = []

    def _record(self, op: str, value: np.ndarray, parents: Sequence[Node],
                backward: Callable[[np.ndarray], None] | None) -> Node:
        node = Node(len(self.nodes), op, tuple(p.id for p in parents), value, backward)
        self.nodes.append(node)
        return node

    # -- leaves ---------------------------------------------------------
    def leaf(self, value, name: str | None = None) -> Node:
        """Register an input or parameter. 1-D input becomes a column vector."""
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        node = self._record("leaf", arr, (), None)
        node.name = name
        return node

    def params(self, params: dict[str, np.ndarray]) -> dict[str, Node]:
        return {k: self.leaf(v, name=k) for k, v in params.items()}

    # -- linear maps ----------------------------------------------------
    def affine(self, W: Node, b: Node, x: Node) -> Node:
        """``W @ x + b`` with ``b`` broadcast over the batch columns."""
        w, bb, xv = W.value, b.value, x.value
        _check(w.ndim == 2 and xv.ndim == 2 and w.shape[1] == xv.shape[0],
               f"affine: W{w.shape} incompatible with x{xv.shape}")
        _check(bb.shape == (w.shape[0], 1), f"affine: bias {bb.shape} != ({w.shape[0]}, 1)")

        def backward(g):
            _accumulate(W, g @ xv.T)
            _accumulate(b, g.sum(axis=1, keepdims=True))
            _accumulate(x, w.T @ g)

        return self._record("affine", w @ xv + bb, (W, b, x), backward)

    def affine_product(self, W: Node, b: Node, x: Node) -> Node:
        """Element-wise product of ``d`` affine maps of the same input.

        ``W`` has shape ``(d, m, n)`` and ``b`` shape ``(d, m, 1)``; the result is
        ``prod_j (W[j] @ x + b[j])``. Factors are recomputed during backward
        instead of being stored, which keeps memory flat for large ``d``.
        """
        w, bb, xv = W.value, b.value, x.value
        _check(w.ndim == 3 and w.shape[2] == xv.shape[0],
               f"affine_product: W{w.shape} incompatible with x{xv.shape}")
        _check(bb.shape == (w.shape[0], w.shape[1], 1),
               f"affine_product: bias {bb.shape} does not match W{w.shape}")
        d, m, n = w.shape
        # bias folded into the matrix product via a row of ones
        wa = np.concatenate([w, bb], axis=2).reshape(d * m, n + 1)
        xa = np.vstack([xv, np.ones((1, xv.shape[1]))])
        B = xv.shape[1]
        # column chunks sized so one chunk of factors stays cache resident
        step = max(8, (1 << 16) // (d * m))
        chunks = [slice(c, min(c + step, B)) for c in range(0, B, step)]

        value = np.empty((m, B))
        for cols in chunks:
            F = (wa @ xa[:, cols]).reshape(d, m, -1)
            np.prod(F, axis=0, out=value[:, cols])

        def backward(g):
            gw = np.zeros((d * m, n + 1))
            gx = np.empty((n, B))
            for cols in chunks:
                F = (wa @ xa[:, cols]).reshape(d, m, -1)
                # G[j] = g * prod_{k<j} F[k] * prod_{k>j} F[k], built in place
                G = np.empty_like(F)
                G[0] = g[:, cols]
                for j in range(1, d):
                    np.multiply(G[j - 1], F[j - 1], out=G[j])
                suffix = F[d - 1].copy()
                for j in range(d - 2, -1, -1):
                    G[j] *= suffix
                    suffix *= F[j]
                G2 = G.reshape(d * m, -1)
                gw += G2 @ xa[:, cols].T
                gx[:, cols] = wa[:, :n].T @ G2
            gw = gw.reshape(d, m, n + 1)
            _accumulate(W, gw[:, :, :n])
            _accumulate(b, gw[:, :, n:])
            _accumulate(x, gx)

        return self._record("affine_product", value, (W, b, x), backward)

    # -- element-wise ---------------------------------------------------
    def hadamard(self, a: Node, b: Node) -> Node:
        _check(a.shape == b.shape, f"hadamard: shapes {a.shape} and {b.shape} differ")
        av, bv = a.value, b.value

        def backward(g):
            _accumulate(a, g * bv)
            _accumulate(b, g * av)

        return self._record("hadamard", av * bv, (a, b), backward)

    def add(self, *xs: Node) -> Node:
        _check(len(xs) >= 1, "add: need at least one operand")
        shape = xs[0].shape
        _check(all(x.shape == shape for x in xs), "add: shapes differ")
        value = xs[0].value
        for x in xs[1:]:
            value = value + x.value

        def backward(g):
            for x in xs:
                _accumulate(x, g)

        return self._record("add", value, xs, backward)

    def pow(self, x: Node, p: int) -> Node:
        if int(p) != p or p < 1:
            raise ValueError(f"pow: exponent must be a positive integer, got {p}")
        p = int(p)
        xv = x.value

        def backward(g):
            _accumulate(x, g * (p * xv ** (p - 1)))

        return self._record("pow", xv ** p, (x,), backward)

    def relu(self, x: Node) -> Node:
        xv = x.value
        mask = xv > 0

        def backward(g):
            _accumulate(x, g * mask)

        return self._record("relu", np.where(mask, xv, 0.0), (x,), backward)

    def softmax(self, v: Node) -> Node:
        """Column-wise softmax (each batch column sums to one)."""
        z = v.value - v.value.max(axis=0, keepdims=True)
        e = np.exp(z)
        p = e / e.sum(axis=0, keepdims=True)

        def backward(g):
            _accumulate(v, p * (g - (g * p).sum(axis=0, keepdims=True)))

        return self._record("softmax", p, (v,), backward)

    # -- structural -----------------------------------------------------
    def concat(self, xs: Sequence[Node]) -> Node:
        """Stack nodes along the feature (row) axis."""
        sizes = [x.shape[0] for x in xs]
        cuts = np.cumsum(sizes)[:-1]

        def backward(g):
            for x, part in zip(xs, np.split(g, cuts, axis=0)):
                _accumulate(x, part)

        return self._record("concat", np.concatenate([x.value for x in xs], axis=0), xs, backward)

    def row(self, x: Node, k: int) -> Node:
        rows = x.shape[0]

        def backward(g):
            full = np.zeros_like(x.value)
            full[k] = g[0]
            _accumulate(x, full)

        _check(0 <= k < rows, f"row: index {k} out of range for {rows} rows")
        return self._record("row", x.value[k:k + 1], (x,), backward)

    def total(self, x: Node) -> Node:
        """Sum of all elements, as a 1x1 node."""

        def backward(g):
            _accumulate(x, np.full_like(x.value, g[0, 0]))

        return self._record("total", np.array([[x.value.sum()]]), (x,), backward)

    def mse(self, pred: Node, target, reduction: str = "mean") -> Node:
        """Squared-error loss against a constant target.

        ``mean`` averages over every element. ``sum_rows`` averages over batch
        columns and sums over output rows (one MSE per row, added up).
        """
        t = np.asarray(target, dtype=np.float64).reshape(pred.shape)
        diff = pred.value - t
        if reduction == "mean":
            scale = 1.0 / diff.size
        elif reduction == "sum_rows":
            scale = 1.0 / diff.shape[1]
        else:
            raise ValueError(f"unknown reduction {reduction!r}")
        _check(diff.size > 0, "mse: empty input")

        def backward(g):
            _accumulate(pred, g[0, 0] * 2.0 * scale * diff)

        return self._record("mse", np.array([[scale * np.sum(diff * diff)]]), (pred,), backward)

    # -- reverse pass ---------------------------------------------------
    def backward(self, output: Node) -> dict[str, np.ndarray]:
        """Populate adjoints of everything upstream of a scalar ``output``.

        Returns the adjoints of every named leaf (parameters).
        """
        if output.value.size != 1:
            raise ValueError(f"backward needs a scalar output, got shape {output.value.shape}")
        for node in self.nodes:
            node.grad = None
        output.grad = np.ones_like(output.value)
        for node in reversed(self.nodes[:output.id + 1]):
            if node.grad is not None and node._backward is not None:
                node._backward(node.grad)
        return {n.name: n.adjoint for n in self.nodes if n.name is not None}
