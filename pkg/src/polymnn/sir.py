"""Discrete-time Kermack-McKendrick SIR model on population fractions.

One step maps ``(s, i, r)`` to::

    s' = s - beta s i
    i' = i + beta s i - gamma i
    r' = r + gamma i

Composing ``L`` steps gives a polynomial of order ``n_L = 2 n_{L-1} + 1`` in
the state and rates, with ``n_1 = 3``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRAIN, TEST = "TRAIN", "TEST"
RATE_RANGES = {
    TRAIN: {"beta": (0.02, 0.09), "gamma": (0.002, 0.01)},
    TEST: {"beta": (0.1, 0.25), "gamma": (0.05, 0.1)},
}


class SirDomainError(ValueError):
    """A step produced a negative compartment (rates out of range)."""


@dataclass(frozen=True)
class SirState:
    s: float
    i: float
    r: float

    def __post_init__(self):
        vals = (self.s, self.i, self.r)
        if any(v < 0 or v > 1 for v in vals):
            raise ValueError(f"compartments must lie in [0, 1], got {vals}")
        if abs(sum(vals) - 1.0) > 1e-12:
            raise ValueError(f"compartments must sum to 1, got {sum(vals)!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.i, self.r])


@dataclass(frozen=True)
class SirParams:
    beta: float
    gamma: float
    T: int
    L: int = 1

    def __post_init__(self):
        if not (self.beta > 0 and self.gamma > 0):
            raise ValueError("beta and gamma must be positive")
        if self.T < 2 or self.L < 1:
            raise ValueError("need T >= 2 and L >= 1")
        if self.T // self.L <= 1:
            raise ValueError(f"T//L must exceed 1 (T={self.T}, L={self.L})")

    @property
    def steps(self) -> int:
        return self.T // self.L


def step_array(x: np.ndarray, beta, gamma) -> np.ndarray:
    """Vectorized step on ``(..., 3)`` arrays; ``beta``/``gamma`` broadcast over ``...``."""
    s, i, r = x[..., 0], x[..., 1], x[..., 2]
    infect = beta * s * i
    recover = gamma * i
    out = np.stack([s - infect, i + infect - recover, r + recover], axis=-1)
    if np.any(out < 0):
        raise SirDomainError("step produced a negative compartment; beta/gamma out of range")
    return out


def step(state: SirState, beta: float, gamma: float) -> SirState:
    s, i, r = step_array(state.as_array(), beta, gamma)
    return SirState(float(s), float(i), float(r))


def simulate(state0: SirState, params: SirParams) -> list[SirState]:
    """Trajectory of ``T + 1`` states, starting with ``state0``."""
    traj = [state0]
    for _ in range(params.T):
        traj.append(step(traj[-1], params.beta, params.gamma))
    return traj


def simulate_many(x0: np.ndarray, beta: np.ndarray, gamma: np.ndarray, T: int) -> np.ndarray:
    """``(N, 3)`` initial states -> ``(N, T + 1, 3)`` trajectories."""
    out = np.empty((x0.shape[0], T + 1, 3))
    out[:, 0] = x0
    for t in range(T):
        out[:, t + 1] = step_array(out[:, t], beta, gamma)
    return out


def lagged_pairs(trajectory, L: int):
    """Stride-``L`` supervised pairs ``(x_{kL}, x_{(k+1)L})``.

    A trajectory of ``T + 1`` states spans ``T//L`` modeled points
    ``x_0, x_L, ..., x_{(T//L - 1)L}`` and hence ``T//L - 1`` transitions.
    """
    traj = np.asarray([t.as_array() if isinstance(t, SirState) else t for t in trajectory], dtype=np.float64)
    if L < 1:
        raise ValueError("L must be at least 1")
    T = traj.shape[0] - 1
    if T < L + 1 or T // L <= 1:
        raise ValueError(f"trajectory of {T + 1} states too short for lag {L}")
    pts = traj[: (T // L) * L: L]
    return pts[:-1], pts[1:]


def polynomial_order_for_lag(L: int) -> int:
    if L < 1:
        raise ValueError("L must be at least 1")
    n = 3
    for _ in range(L - 1):
        n = 2 * n + 1
    return n


def lag2_closed_form(s, i, r, beta, gamma):
    """Two steps at once, expanded as a polynomial in the state and rates."""
    b, g = beta, gamma
    s2 = (b**3 * s**2 * i**2 - b**2 * g * s * i**2 + b**2 * s * i**2 - b**2 * s**2 * i
          + b * g * s * i - 2 * b * s * i + s)
    i2 = (-b**3 * s**2 * i**2 + b**2 * g * s * i**2 - b**2 * s * i**2 + b**2 * s**2 * i
          - 2 * b * g * s * i + 2 * b * s * i + g**2 * i - 2 * g * i + i)
    r2 = b * g * i * s - g**2 * i + 2 * g * i + r
    return s2, i2, r2


def normalize_draws(draws) -> SirState:
    d = np.asarray(draws, dtype=np.float64)
    x = d / d.sum()
    # pin the sum: put the rounding residue on the largest compartment
    k = int(np.argmax(x))
    x[k] = 1.0 - (x.sum() - x[k])
    return SirState(*(float(v) for v in x))


def sample_initial_state(seed) -> SirState:
    rng = np.random.default_rng(seed)
    while True:
        draws = rng.uniform(0.0, 100.0, size=3)
        if draws.sum() > 0:
            return normalize_draws(draws)


def sample_rates(regime: str, seed) -> tuple[float, float]:
    try:
        ranges = RATE_RANGES[regime.upper()]
    except KeyError:
        raise ValueError(f"regime must be TRAIN or TEST, got {regime!r}") from None
    rng = np.random.default_rng(seed)
    beta = rng.uniform(*ranges["beta"])
    gamma = rng.uniform(*ranges["gamma"])
    return float(beta), float(gamma)


_REGIME_CODE = {TRAIN: 0, TEST: 1}


@dataclass
class SimulationSet:
    """A batch of full-resolution trajectories sharing one duration ``T``."""

    states: np.ndarray  # (N, T + 1, 3)
    beta: np.ndarray  # (N,)
    gamma: np.ndarray  # (N,)

    def __len__(self):
        return self.states.shape[0]

    @property
    def T(self) -> int:
        return self.states.shape[1] - 1

    def subset(self, idx) -> "SimulationSet":
        return SimulationSet(self.states[idx], self.beta[idx], self.gamma[idx])

    def modeled(self, L: int) -> np.ndarray:
        """``(N, T//L, 3)`` stride-``L`` points (see :func:`lagged_pairs`)."""
        n_pts = self.T // L
        if n_pts <= 1:
            raise ValueError(f"T//L must exceed 1 (T={self.T}, L={L})")
        return self.states[:, : n_pts * L: L]

    def pairs(self, L: int) -> tuple[np.ndarray, np.ndarray]:
        """Features ``(N, T//L - 1, 5)`` as (s, i, r, beta, gamma) and targets ``(N, T//L - 1, 3)``."""
        pts = self.modeled(L)
        k = pts.shape[1] - 1
        rates = np.broadcast_to(np.stack([self.beta, self.gamma], axis=-1)[:, None, :], (len(self), k, 2))
        X = np.concatenate([pts[:, :-1], rates], axis=-1)
        return X, pts[:, 1:].copy()

    def trajectories_csv(self, path) -> None:
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sim_id", "t", "s", "i", "r", "beta", "gamma"])
            for n in range(len(self)):
                for t in range(self.T + 1):
                    w.writerow([n, t, *(repr(float(v)) for v in self.states[n, t]),
                                repr(float(self.beta[n])), repr(float(self.gamma[n]))])

    def pairs_csv(self, path, L: int) -> None:
        X, Y = self.pairs(L)
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sim_id", "k", "s_in", "i_in", "r_in", "beta", "gamma", "s_out", "i_out", "r_out"])
            for n in range(X.shape[0]):
                for k in range(X.shape[1]):
                    w.writerow([n, k, *(repr(float(v)) for v in X[n, k]), *(repr(float(v)) for v in Y[n, k])])


def generate(n: int, regime: str, T: int, seed) -> SimulationSet:
    """``n`` simulations; simulation ``k`` draws from the stream ``(seed, regime, k)``."""
    if n < 1:
        raise ValueError("need at least one simulation")
    if T < 2:
        raise ValueError("T must be at least 2")
    code = _REGIME_CODE[regime.upper()]
    x0 = np.empty((n, 3))
    beta = np.empty(n)
    gamma = np.empty(n)
    for k in range(n):
        ss = np.random.SeedSequence([int(seed), code, k])
        s_seed, r_seed = ss.spawn(2)
        x0[k] = sample_initial_state(s_seed).as_array()
        beta[k], gamma[k] = sample_rates(regime, r_seed)
    return SimulationSet(simulate_many(x0, beta, gamma, T), beta, gamma)
