"""Nine benchmark functions, domain sampling and the 5-95 percentile split.

The formulas are transcribed as given for this benchmark set, including
the spots where they differ from the usual literature forms (Price 3 lacks the
outer square on its second term, Colville uses ``(1 - x3^2)`` and
``(x1 - x2^2)``). Evaluation does not require the input to lie in the domain.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dataset import Dataset


def currin(x1, x2):
    return 4.9 + 21.15 * x1 - 2.17 * x2 - 15.88 * x1**2 - 1.38 * x2**2 - 5.26 * x1 * x2


def bukin6(x1, x2):
    return 100.0 * np.sqrt(np.abs(x2 - 0.01 * x1**2)) + 0.01 * np.abs(x1 + 10.0)


def price3(x1, x2):
    return 100.0 * (x2 - x1**2) ** 2 + 6.0 * (6.4 * (x2 - 0.5) ** 2 - x1 - 0.6)


def dette_pepelyshev(x1, x2, x3):
    x3 = np.asarray(x3, dtype=np.float64)
    if np.any(x3 <= -1):
        raise ValueError("Dette-Pepelyshev needs x3 > -1")
    return (4.0 * (x1 - 2.0 + 8.0 * x2 - 8.0 * x2**2) ** 2 + (3.0 - 4.0 * x2) ** 2
            + 16.0 * np.sqrt(x3 + 1.0) * (2.0 * x3 - 1.0) ** 2)


def colville(x1, x2, x3, x4):
    return (100.0 * (x1 - x2**2) ** 2 + (1.0 - x1) ** 2 + 90.0 * (x4 - x3**2) ** 2 + (1.0 - x3**2)
            + 10.1 * ((x2 - 1.0) ** 2 + (x4 - 1.0) ** 2) + 19.8 * (x2 - 1.0) * (x4 - 1.0))


def lim(x1, x2):
    return (9.0 + 2.5 * x1 - 17.5 * x2 + 2.5 * x1 * x2 + 19.0 * x2**2 - 7.5 * x1**3
            - 2.5 * x1 * x2**2 - 5.5 * x2**4 + x1**3 * x2**2)


def camel_three_hump(x1, x2):
    return 2.0 * x1**2 - 1.05 * x1**4 + x1**6 / 6.0 + x1 * x2 + x2**2


def beale(x1, x2):
    return ((1.5 - x1 + x1 * x2) ** 2 + (2.25 - x1 + x1 * x2**2) ** 2
            + (2.625 - x1 + x1 * x2**3) ** 2)


def goldstein_price(x1, x2):
    a = 1.0 + (x1 + x2 + 1.0) ** 2 * (19.0 - 14.0 * x1 + 3.0 * x1**2 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2**2)
    b = 30.0 + (2.0 * x1 - 3.0 * x2) ** 2 * (18.0 - 32.0 * x1 + 12.0 * x1**2 + 48.0 * x2
                                            - 36.0 * x1 * x2 + 27.0 * x2**2)
    return a * b


@dataclass(frozen=True)
class BenchmarkFn:
    name: str
    func: Callable
    domain: tuple[tuple[float, float], ...]
    order: int

    @property
    def arity(self) -> int:
        return len(self.domain)

    def __call__(self, X):
        return eval_benchmark(self.name, X)

    def metadata(self) -> dict:
        return {"name": self.name, "arity": self.arity, "order": self.order,
                "domain": [list(d) for d in self.domain]}


BENCHMARKS: dict[str, BenchmarkFn] = {b.name: b for b in [
    BenchmarkFn("Currin", currin, ((0.0, 1.0),) * 2, 2),
    BenchmarkFn("Bukin6", bukin6, ((-15.0, 5.0), (-3.0, 3.0)), 2),
    BenchmarkFn("Price3", price3, ((-500.0, 500.0),) * 2, 4),
    BenchmarkFn("DettePepelyshev", dette_pepelyshev, ((0.0, 1.0),) * 3, 4),
    BenchmarkFn("Colville", colville, ((-10.0, 10.0),) * 4, 4),
    BenchmarkFn("Lim", lim, ((0.0, 1.0),) * 2, 5),
    BenchmarkFn("CamelThreeHump", camel_three_hump, ((-5.0, 5.0),) * 2, 6),
    BenchmarkFn("Beale", beale, ((-4.5, 4.5),) * 2, 8),
    BenchmarkFn("GoldsteinPrice", goldstein_price, ((-2.0, 2.0),) * 2, 8),
]}


def get(name: str) -> BenchmarkFn:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}") from None


def eval_benchmark(name: str, x):
    """Evaluate on a vector of length ``arity`` or on rows of an ``(N, arity)`` array."""
    fn = get(name)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != fn.arity:
        raise ValueError(f"{name} takes {fn.arity} inputs, got {x.shape[-1]}")
    out = fn.func(*np.moveaxis(x, -1, 0))
    return float(out) if x.ndim == 1 else np.asarray(out, dtype=np.float64)


def sample_domain(name: str, n: int, seed) -> np.ndarray:
    """``(n, arity)`` samples, each variable uniform on its own interval."""
    if n < 1:
        raise ValueError("n must be at least 1")
    fn = get(name)
    rng = np.random.default_rng(seed)
    lo = np.array([d[0] for d in fn.domain])
    hi = np.array([d[1] for d in fn.domain])
    return rng.uniform(lo, hi, size=(n, fn.arity))


def percentile_split(samples, lower: float = 5.0, upper: float = 95.0):
    """Boolean mask of rows whose every column lies inside its own [5th, 95th] percentile.

    Returns ``(train_mask, test_mask)``; the two are complementary.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape[0] < 100:
        raise ValueError("percentile split needs at least 100 samples")
    lo = np.percentile(samples, lower, axis=0)
    hi = np.percentile(samples, upper, axis=0)
    inside = np.all((samples >= lo) & (samples <= hi), axis=1)
    return inside, ~inside


def metadata_json() -> str:
    return json.dumps([b.metadata() for b in BENCHMARKS.values()], indent=2)


def split_datasets(name: str, n: int, seed):
    """Sample the domain, evaluate, and split into (train, test) datasets."""
    X = sample_domain(name, n, seed)
    y = eval_benchmark(name, X)
    inside, outside = percentile_split(X)
    names = [f"x{k + 1}" for k in range(X.shape[1])]
    return Dataset(X[inside], y[inside], names), Dataset(X[outside], y[outside], list(names))


def write_split_csv(path, name: str, n: int, seed) -> None:
    """CSV of ``x1,...,xK,target,split`` with split in {train, test}."""
    X = sample_domain(name, n, seed)
    y = eval_benchmark(name, X)
    inside, _ = percentile_split(X)
    Dataset(X, y).to_csv(path, extra={"split": ["train" if m else "test" for m in inside]})
