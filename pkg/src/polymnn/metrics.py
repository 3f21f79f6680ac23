"""Regression metrics: MSE, RRSE, R^2 and MAE.

RRSE and R^2 normalize by the spread of the evaluated targets around their own
mean. With fewer than two samples, or zero target variance, they are NaN.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

NAN_POLICIES = ("propagate", "skip")


def _pair(y, y_hat):
    y = np.asarray(y, dtype=np.float64).ravel()
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    if y.shape != y_hat.shape:
        raise ValueError(f"length mismatch: {y.size} targets vs {y_hat.size} predictions")
    if y.size == 0:
        raise ValueError("empty input")
    return y, y_hat


def mse(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.mean((y - y_hat) ** 2))


def mae(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.mean(np.abs(y - y_hat)))


def _ratio(y, y_hat):
    num = np.sum((y_hat - y) ** 2)
    den = np.sum((y - y.mean()) ** 2)
    if y.size < 2 or den == 0:
        return np.nan
    return num / den


def rrse(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.sqrt(_ratio(y, y_hat)))


def r2(y, y_hat) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(1.0 - _ratio(y, y_hat))


@dataclass
class MetricsReport:
    mse: float
    rrse: float
    r2: float
    mae: float
    nan_count: int
    n: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(**d)

    @property
    def has_nan(self) -> bool:
        return self.nan_count > 0 or any(np.isnan(v) for v in (self.mse, self.rrse, self.r2, self.mae))


def evaluate(y, y_hat, nan_policy: str = "propagate") -> MetricsReport:
    """All four metrics for one (target, prediction) set.

    ``nan_count`` counts non-finite predictions. Under ``propagate`` they poison
    the metrics; under ``skip`` the metrics use the finite subset only.
    """
    if nan_policy not in NAN_POLICIES:
        raise ValueError(f"nan_policy must be one of {NAN_POLICIES}")
    y, y_hat = _pair(y, y_hat)
    bad = ~np.isfinite(y_hat)
    nan_count = int(bad.sum())
    if nan_policy == "skip" and nan_count:
        y, y_hat = y[~bad], y_hat[~bad]
        if y.size == 0:
            return MetricsReport(np.nan, np.nan, np.nan, np.nan, nan_count, 0)
    with np.errstate(all="ignore"):
        return MetricsReport(mse(y, y_hat), rrse(y, y_hat), r2(y, y_hat), mae(y, y_hat), nan_count, int(y.size))


def mean_report(reports: list[MetricsReport]) -> MetricsReport:
    """Average several reports (e.g. one per compartment) field by field."""
    if not reports:
        raise ValueError("no reports to average")
    return MetricsReport(
        mse=float(np.mean([r.mse for r in reports])),
        rrse=float(np.mean([r.rrse for r in reports])),
        r2=float(np.mean([r.r2 for r in reports])),
        mae=float(np.mean([r.mae for r in reports])),
        nan_count=int(sum(r.nan_count for r in reports)),
        n=int(sum(r.n for r in reports)),
    )
