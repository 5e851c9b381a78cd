"""Sample container and split utilities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import derive_rng


@dataclass(frozen=True)
class Dataset:
    """An n x p predictor matrix with its n-vector response."""

    X: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D array")
        if y.ndim != 1 or y.size != X.shape[0]:
            raise ValueError("y must be a vector with one entry per row of X")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.columns is not None and len(self.columns) != X.shape[1]:
            raise ValueError("column names do not match the number of predictors")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def take(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.columns)


def random_split(data: Dataset, n_tr: int, seed: int) -> tuple[Dataset, Dataset]:
    """Uniform random partition into train (n_tr rows) and test (the rest).

    Deterministic given the seed; train and test indices are disjoint and
    jointly exhaust the rows.
    """
    if not 0 < n_tr < data.n:
        raise ValueError(f"n_tr must be in (0, {data.n}), got {n_tr}")
    rng = derive_rng(seed, "split")
    perm = rng.permutation(data.n)
    return data.take(np.sort(perm[:n_tr])), data.take(np.sort(perm[n_tr:]))
