"""Symbolic multivariate polynomials, Gaussian sampling and the OOD test grid.

Polynomials are written in a compact text form: single-letter variables,
optional ``^k`` (or ``^{k}``) exponents, integer or decimal coefficients, and
implicit multiplication between adjacent factors::

    "2a^3 b^2 - 3c"     "2a^3 6b^2"  (= 12 a^3 b^2)     "a b c + d - e - f - g"
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

import numpy as np

from .dataset import Dataset


class PolynomialParseError(ValueError):
    def __init__(self, msg, text, pos):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.pos = pos


Monomial = tuple[tuple[str, int], ...]  # sorted (variable, exponent) pairs


@dataclass(frozen=True)
class PolynomialExpr:
    """Canonical sum of terms; ``terms`` maps monomial -> coefficient."""

    terms: tuple[tuple[Monomial, float], ...]

    @classmethod
    def from_terms(cls, pairs) -> "PolynomialExpr":
        merged: dict[Monomial, float] = {}
        for mono, coeff in pairs:
            mono = tuple(sorted((v, int(e)) for v, e in dict(mono).items() if e != 0))
            merged[mono] = merged.get(mono, 0.0) + float(coeff)
        kept = [(m, c) for m, c in merged.items() if c != 0.0]
        kept.sort(key=lambda mc: (-sum(e for _, e in mc[0]), mc[0]))
        return cls(tuple(kept))

    @property
    def variables(self) -> list[str]:
        return sorted({v for mono, _ in self.terms for v, _ in mono})

    def __str__(self):
        return to_text(self)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<var>[A-Za-z])|(?P<op>[+\-])|(?P<pow>\^))")
_EXP = re.compile(r"\s*(?:\{\s*(\d+)\s*\}|(\d+))")


def parse_polynomial(text: str) -> PolynomialExpr:
    pos, n = 0, len(text)
    terms = []
    sign = 1.0
    coeff, mono, have_factor = 1.0, {}, False
    expect_term = True

    def flush(at):
        nonlocal coeff, mono, have_factor
        if not have_factor:
            raise PolynomialParseError("expected a term", text, at)
        terms.append((dict(mono), sign * coeff))
        coeff, mono, have_factor = 1.0, {}, False

    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PolynomialParseError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group("op"):
            if have_factor:
                flush(start)
                sign = 1.0 if m.group("op") == "+" else -1.0
            elif expect_term and not terms:
                sign *= 1.0 if m.group("op") == "+" else -1.0
            else:
                raise PolynomialParseError("unexpected operator", text, start)
            expect_term = True
            pos = m.end()
        elif m.group("num"):
            coeff *= float(m.group("num"))
            have_factor = True
            pos = m.end()
        elif m.group("var"):
            var = m.group("var")
            pos = m.end()
            exp = 1
            if pos < n and text[pos] == "^":
                e = _EXP.match(text, pos + 1)
                if e is None:
                    raise PolynomialParseError("expected integer exponent", text, pos + 1)
                exp = int(e.group(1) or e.group(2))
                if exp < 1:
                    raise PolynomialParseError("exponent must be positive", text, pos + 1)
                pos = e.end()
            mono[var] = mono.get(var, 0) + exp
            have_factor = True
        else:
            raise PolynomialParseError("dangling '^'", text, start)
    if not terms and not have_factor:
        raise PolynomialParseError("empty polynomial", text, 0)
    flush(n)
    return PolynomialExpr.from_terms(terms)


def _fmt_coeff(c: float) -> str:
    return str(int(c)) if float(c).is_integer() and abs(c) < 2**53 else repr(float(c))


def to_text(expr: PolynomialExpr) -> str:
    if not expr.terms:
        return "0"
    parts = []
    for k, (mono, c) in enumerate(expr.terms):
        body = " ".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
        mag = abs(c)
        if not body:
            term = _fmt_coeff(mag)
        elif mag == 1.0:
            term = body
        else:
            term = f"{_fmt_coeff(mag)}{body}"
        if k == 0:
            parts.append(("-" if c < 0 else "") + term)
        else:
            parts.append(("- " if c < 0 else "+ ") + term)
    return " ".join(parts)


def eval_polynomial(expr: PolynomialExpr, assignment: Mapping[str, object]):
    """Evaluate term by term. Values may be scalars or equal-length arrays."""
    missing = [v for v in expr.variables if v not in assignment]
    if missing:
        raise KeyError(f"no value for variable(s) {missing}")
    total = 0.0
    for mono, c in expr.terms:
        term = c
        for v, e in mono:
            term = term * np.asarray(assignment[v], dtype=np.float64) ** e
        total = total + term
    return total


def polynomial_order(expr: PolynomialExpr) -> int:
    return max((sum(e for _, e in mono) for mono, _ in expr.terms), default=0)


def interactions(expr: PolynomialExpr) -> int:
    return max((len(mono) for mono, _ in expr.terms), default=0)


@dataclass(frozen=True)
class GaussianSpec:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def label(self) -> str:
        return f"N({self.mu:g},{self.sigma:g})"


TRAIN_SPEC = GaussianSpec(0.0, 5.0)
ALT_TRAIN_SPEC = GaussianSpec(0.0, 1.0)


def sample_gaussian_dataset(expr: PolynomialExpr, spec: GaussianSpec, n: int, seed) -> Dataset:
    """Each variable i.i.d. from ``spec``; columns follow ``expr.variables``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    names = expr.variables
    rng = np.random.default_rng(seed)
    X = rng.normal(spec.mu, spec.sigma, size=(n, len(names)))
    with np.errstate(all="ignore"):
        y = eval_polynomial(expr, {v: X[:, k] for k, v in enumerate(names)})
    y = np.broadcast_to(np.asarray(y, dtype=np.float64), (n,)).copy()
    return Dataset(X, y, list(names))


def ood_test_grid() -> list[GaussianSpec]:
    """The nine test distributions, mean-major."""
    return [GaussianSpec(mu, sigma) for mu in (-50.0, 0.0, 90.0) for sigma in (1.0, 5.0, 25.0)]


def load_manifest(text: str | None = None) -> list[str]:
    """Polynomial manifest: one expression per line, ``#`` starts a comment."""
    if text is None:
        text = resources.files("polymnn.data").joinpath("polynomials.txt").read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def default_suite() -> list[PolynomialExpr]:
    return [parse_polynomial(s) for s in load_manifest()]
