from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class Dataset:
    """Row-major regression data: ``X`` is ``(N, n_features)``, ``y`` is ``(N,)`` or ``(N, n_out)``."""

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim == 1:
            self.X = self.X[:, None]
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError(f"{self.X.shape[0]} feature rows but {self.y.shape[0]} targets")
        if not self.feature_names:
            self.feature_names = [f"x{k + 1}" for k in range(self.X.shape[1])]

    def __len__(self):
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], list(self.feature_names))

    def split_tail(self, fraction: float) -> tuple["Dataset", "Dataset"]:
        """Hold out the last ``fraction`` of rows (no shuffling)."""
        if not 0 < fraction < 1:
            raise ValueError("fraction must lie in (0, 1)")
        n_val = int(round(len(self) * fraction))
        n_val = min(max(n_val, 1), len(self) - 1)
        cut = len(self) - n_val
        return self.subset(slice(0, cut)), self.subset(slice(cut, None))

    def to_csv(self, path, extra: dict[str, list] | None = None) -> None:
        """Write ``var1,...,varK,target`` (plus optional extra columns)."""
        y = self.y if self.y.ndim == 2 else self.y[:, None]
        targets = ["target"] if y.shape[1] == 1 else [f"target{k + 1}" for k in range(y.shape[1])]
        extra = extra or {}
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.feature_names + targets + list(extra))
            for k in range(len(self)):
                w.writerow([repr(float(v)) for v in self.X[k]] + [repr(float(v)) for v in y[k]]
                           + [col[k] for col in extra.values()])
