"""Independent reference implementations used as test oracles.

Nothing here imports the package under test: the benchmark formulas are typed
again as sympy expressions and evaluated in 40-digit arithmetic, the SIR map is
iterated in exact rationals, and gradients are checked against central
finite differences.
"""
from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np
import sympy as sp

x1, x2, x3, x4 = sp.symbols("x1 x2 x3 x4")
R = sp.Rational

BENCHMARK_EXPRS = {
    "Currin": (R(49, 10) + R(2115, 100) * x1 - R(217, 100) * x2 - R(1588, 100) * x1**2
               - R(138, 100) * x2**2 - R(526, 100) * x1 * x2, (x1, x2)),
    "Bukin6": (100 * sp.sqrt(sp.Abs(x2 - R(1, 100) * x1**2)) + R(1, 100) * sp.Abs(x1 + 10), (x1, x2)),
    "Price3": (100 * (x2 - x1**2) ** 2 + 6 * (R(64, 10) * (x2 - R(1, 2)) ** 2 - x1 - R(6, 10)), (x1, x2)),
    "DettePepelyshev": (4 * (x1 - 2 + 8 * x2 - 8 * x2**2) ** 2 + (3 - 4 * x2) ** 2
                        + 16 * sp.sqrt(x3 + 1) * (2 * x3 - 1) ** 2, (x1, x2, x3)),
    "Colville": (100 * (x1 - x2**2) ** 2 + (1 - x1) ** 2 + 90 * (x4 - x3**2) ** 2 + (1 - x3**2)
                 + R(101, 10) * ((x2 - 1) ** 2 + (x4 - 1) ** 2) + R(198, 10) * (x2 - 1) * (x4 - 1),
                 (x1, x2, x3, x4)),
    "Lim": (9 + R(5, 2) * x1 - R(35, 2) * x2 + R(5, 2) * x1 * x2 + 19 * x2**2 - R(15, 2) * x1**3
            - R(5, 2) * x1 * x2**2 - R(11, 2) * x2**4 + x1**3 * x2**2, (x1, x2)),
    "CamelThreeHump": (2 * x1**2 - R(105, 100) * x1**4 + x1**6 / 6 + x1 * x2 + x2**2, (x1, x2)),
    "Beale": ((R(3, 2) - x1 + x1 * x2) ** 2 + (R(9, 4) - x1 + x1 * x2**2) ** 2
              + (R(21, 8) - x1 + x1 * x2**3) ** 2, (x1, x2)),
    "GoldsteinPrice": ((1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2))
                       * (30 + (2 * x1 - 3 * x2) ** 2 * (18 - 32 * x1 + 12 * x1**2 + 48 * x2
                                                         - 36 * x1 * x2 + 27 * x2**2)), (x1, x2)),
}

BENCHMARK_DOMAINS = {
    "Currin": [(0, 1)] * 2, "Bukin6": [(-15, 5), (-3, 3)], "Price3": [(-500, 500)] * 2,
    "DettePepelyshev": [(0, 1)] * 3, "Colville": [(-10, 10)] * 4, "Lim": [(0, 1)] * 2,
    "CamelThreeHump": [(-5, 5)] * 2, "Beale": [(-4.5, 4.5)] * 2, "GoldsteinPrice": [(-2, 2)] * 2,
}


def benchmark_oracle(name: str):
    expr, args = BENCHMARK_EXPRS[name]
    f = sp.lambdify(args, expr, modules="mpmath")

    def evaluate(X):
        with mpmath.workdps(40):
            return np.array([float(f(*(mpmath.mpf(float(v)) for v in row))) for row in np.atleast_2d(X)])

    return evaluate


def sir_exact(s, i, r, beta, gamma, steps: int):
    """Iterate the SIR map in exact rational arithmetic from float inputs."""
    s, i, r, b, g = (Fraction(float(v)) for v in (s, i, r, beta, gamma))
    for _ in range(steps):
        inf, rec = b * s * i, g * i
        s, i, r = s - inf, i + inf - rec, r + rec
    return s, i, r


def central_gradient(f, params: dict[str, np.ndarray], h: float = 1e-5) -> dict[str, np.ndarray]:
    """Central differences of a scalar function of named parameter arrays (perturbed in place)."""
    out = {}
    for k, a in params.items():
        g = np.zeros_like(a)
        flat, gflat = a.reshape(-1), g.reshape(-1)
        for j in range(flat.size):
            old = flat[j]
            flat[j] = old + h
            up = f()
            flat[j] = old - h
            down = f()
            flat[j] = old
            gflat[j] = (up - down) / (2 * h)
        out[k] = g
    return out


def gradient_violation(analytic, numeric, rel: float = 1e-5, small: float = 1e-6, abs_tol: float = 1e-8) -> float:
    """Worst tolerance ratio (pass iff <= 1).

    Entries with ``|analytic| >= small`` are held to relative error ``rel``;
    smaller entries to absolute error ``abs_tol``.
    """
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    err = np.abs(a - n)
    big = np.abs(a) >= small
    ratios = np.where(big, err / np.maximum(np.abs(a), small) / rel, err / abs_tol)
    return float(ratios.max()) if ratios.size else 0.0
