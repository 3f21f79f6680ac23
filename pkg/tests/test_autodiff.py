import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from polymnn.autodiff import Graph
from oracles import central_gradient, gradient_violation


def test_affine_examples():
    g = Graph()
    out = g.affine(g.leaf(np.eye(2)), g.leaf(np.zeros((2, 1))), g.leaf([3.0, -1.0]))
    assert out.value.ravel().tolist() == [3.0, -1.0]
    out = g.affine(g.leaf([[1.0, 2.0], [0.0, 1.0]]), g.leaf([[1.0], [1.0]]), g.leaf([1.0, 1.0]))
    assert out.value.ravel().tolist() == [4.0, 2.0]
    out = g.affine(g.leaf(np.zeros((1, 3))), g.leaf([[5.0]]), g.leaf([7.0, -2.0, 1e9]))
    assert out.value.ravel().tolist() == [5.0]


def test_affine_shape_mismatch():
    g = Graph()
    with pytest.raises(ValueError):
        g.affine(g.leaf(np.ones((2, 3))), g.leaf(np.zeros((2, 1))), g.leaf(np.ones(2)))
    with pytest.raises(ValueError):
        g.affine(g.leaf(np.ones((2, 3))), g.leaf(np.zeros((3, 1))), g.leaf(np.ones(3)))


def test_hadamard_examples():
    g = Graph()
    assert g.hadamard(g.leaf([1.0, 1, 1]), g.leaf([4.0, 5, 6])).value.ravel().tolist() == [4, 5, 6]
    assert g.hadamard(g.leaf([2.0, 3]), g.leaf([5.0, -1])).value.ravel().tolist() == [10, -3]
    assert g.hadamard(g.leaf([0.0, 7]), g.leaf([9.0, 0])).value.ravel().tolist() == [0, 0]
    with pytest.raises(ValueError):
        g.hadamard(g.leaf([1.0, 2]), g.leaf([1.0, 2, 3]))


def test_pow_examples():
    g = Graph()
    assert g.pow(g.leaf([2.0, -3]), 1).value.ravel().tolist() == [2, -3]
    assert g.pow(g.leaf([2.0, -3]), 2).value.ravel().tolist() == [4, 9]
    assert g.pow(g.leaf([10.0]), 3).value.ravel().tolist() == [1000]
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            g.pow(g.leaf([1.0]), bad)


def test_pow_overflow_propagates():
    g = Graph()
    with np.errstate(over="ignore"):
        out = g.pow(g.leaf([1e200]), 3)
    assert np.isinf(out.value).all()


def test_softmax_examples():
    g = Graph()
    np.testing.assert_allclose(g.softmax(g.leaf([0.0, 0, 0])).value.ravel(), [1 / 3] * 3, rtol=0, atol=1e-15)
    np.testing.assert_allclose(g.softmax(g.leaf([np.log(2.0), 0])).value.ravel(), [2 / 3, 1 / 3], atol=1e-15)
    out = g.softmax(g.leaf([5.0, 1005.0])).value.ravel()
    assert np.all(np.isfinite(out)) and out[0] < 1e-300 and out[1] == 1.0
    assert np.isnan(g.softmax(g.leaf([np.nan, 0.0])).value).all()


def test_backward_textbook():
    g = Graph()
    x = g.leaf([3.0], name="x")
    grads = g.backward(g.total(g.pow(x, 2)))
    assert grads["x"].ravel().tolist() == [6.0]


def test_backward_softmax_jacobian():
    g = Graph()
    x = g.leaf([0.0, 0.0], name="x")
    grads = g.backward(g.row(g.softmax(x), 0))
    np.testing.assert_allclose(grads["x"].ravel(), [0.25, -0.25], atol=1e-15)


def test_backward_needs_scalar():
    g = Graph()
    x = g.leaf([1.0, 2.0], name="x")
    with pytest.raises(ValueError):
        g.backward(g.pow(x, 2))


def test_unreached_leaf_gets_zero_adjoint():
    g = Graph()
    x = g.leaf([1.0, 2.0], name="x")
    y = g.leaf([5.0], name="y")
    grads = g.backward(g.total(x))
    assert grads["y"].tolist() == [[0.0]]


def test_fanout_accumulates():
    # f(x) = x*x + x  ->  2x + 1
    g = Graph()
    x = g.leaf([1.5, -2.0], name="x")
    grads = g.backward(g.total(g.add(g.hadamard(x, x), x)))
    np.testing.assert_allclose(grads["x"].ravel(), [4.0, -3.0])


def _check_op(build, params, seed=0):
    """Compare reverse mode against central differences on sum(w * build(...))."""
    rng = np.random.default_rng(seed)
    g0 = Graph()
    shape = build(g0, g0.params(params)).shape
    w = rng.normal(size=shape)

    def f():
        g = Graph()
        return float(np.sum(w * build(g, g.params(params)).value))

    g = Graph()
    out = build(g, g.params(params))
    grads = g.backward(g.total(g.hadamard(out, g.leaf(w))))
    num = central_gradient(f, params)
    return max(gradient_violation(grads[k], num[k]) for k in params)


def test_gradients_of_each_op():
    rng = np.random.default_rng(1)
    p = {"W": rng.normal(size=(3, 4)), "b": rng.normal(size=(3, 1)), "x": rng.normal(size=(4, 5)),
         "S": rng.normal(size=(3, 2, 4)) * 0.7, "Sb": rng.normal(size=(3, 2, 1)) * 0.3,
         "y": rng.normal(size=(3, 5))}
    cases = {
        "affine": lambda g, q: g.affine(q["W"], q["b"], q["x"]),
        "affine_product": lambda g, q: g.affine_product(q["S"], q["Sb"], q["x"]),
        "hadamard": lambda g, q: g.hadamard(g.affine(q["W"], q["b"], q["x"]), q["y"]),
        "pow": lambda g, q: g.pow(q["y"], 3),
        "relu": lambda g, q: g.relu(q["y"]),
        "softmax": lambda g, q: g.softmax(q["y"]),
        "concat": lambda g, q: g.concat([q["y"], g.pow(q["y"], 2)]),
        "add": lambda g, q: g.add(q["y"], q["y"], g.pow(q["y"], 2)),
        "row": lambda g, q: g.row(q["y"], 1),
    }
    for name, build in cases.items():
        assert _check_op(build, p) <= 1.0, name


def test_mse_reductions():
    g = Graph()
    pred = g.leaf([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]], name="p")
    target = [[1.0, 2.0, 4.0], [1.0, 1.0, 1.0]]
    assert g.mse(pred, target).value[0, 0] == pytest.approx(4 / 6)
    loss = g.mse(pred, target, reduction="sum_rows")
    assert loss.value[0, 0] == pytest.approx(1 / 3 + 1)
    grads = g.backward(loss)
    np.testing.assert_allclose(grads["p"], 2 / 3 * (np.array(pred.value) - target))
    with pytest.raises(ValueError):
        g.mse(pred, target, reduction="median")


def test_affine_product_single_factor_matches_affine():
    rng = np.random.default_rng(3)
    W, b, x = rng.normal(size=(1, 4, 3)), rng.normal(size=(1, 4, 1)), rng.normal(size=(3, 7))
    g = Graph()
    a = g.affine_product(g.leaf(W), g.leaf(b), g.leaf(x)).value
    np.testing.assert_allclose(a, W[0] @ x + b[0], rtol=1e-15)


def test_affine_product_chunks_match_dense():
    # many columns force several chunks; compare against the plain product
    rng = np.random.default_rng(4)
    d, m, n, B = 5, 64, 3, 900
    W, b, x = rng.normal(size=(d, m, n)) * 0.5, rng.normal(size=(d, m, 1)), rng.normal(size=(n, B))
    g = Graph()
    Wn, bn, xn = g.leaf(W, name="W"), g.leaf(b, name="b"), g.leaf(x, name="x")
    out = g.affine_product(Wn, bn, xn)
    np.testing.assert_allclose(out.value, np.prod(np.matmul(W, x) + b, axis=0), rtol=1e-12)
    grads = g.backward(g.total(out))
    F = np.matmul(W, x) + b
    gF = np.stack([np.prod(np.delete(F, j, axis=0), axis=0) for j in range(d)])
    np.testing.assert_allclose(grads["W"], np.matmul(gF, x.T), rtol=1e-10)
    np.testing.assert_allclose(grads["b"], gF.sum(axis=2, keepdims=True), rtol=1e-10)


def test_nan_propagates_through_backward():
    g = Graph()
    x = g.leaf([np.nan, 1.0], name="x")
    grads = g.backward(g.total(g.pow(x, 2)))
    assert np.isnan(grads["x"][0, 0]) and grads["x"][1, 0] == 2.0


def test_determinism_bit_identical():
    rng = np.random.default_rng(5)
    W, b, x = rng.normal(size=(4, 8, 3)), rng.normal(size=(4, 8, 1)), rng.normal(size=(3, 50))

    def run():
        g = Graph()
        Wn = g.leaf(W, name="W")
        out = g.affine_product(Wn, g.leaf(b), g.leaf(x))
        return out.value.tobytes(), g.backward(g.total(out))["W"].tobytes()

    assert run() == run()


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-50, 50)), st.floats(-100, 100))
def test_softmax_sums_to_one_and_is_shift_invariant(v, c):
    g = Graph()
    p = g.softmax(g.leaf(v)).value
    q = g.softmax(g.leaf(v + c)).value
    assert abs(p.sum() - 1.0) <= 1e-12
    assert np.all(p > 0)
    np.testing.assert_allclose(p, q, rtol=0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_parents_precede_children(seed):
    rng = np.random.default_rng(seed)
    g = Graph()
    x = g.leaf(rng.normal(size=(3, 2)))
    W = g.leaf(rng.normal(size=(2, 3)))
    h = g.relu(g.affine(W, g.leaf(np.zeros((2, 1))), x))
    g.total(g.softmax(g.concat([h, g.pow(h, 2)])))
    for node in g.nodes:
        assert all(p < node.id for p in node.parents)
