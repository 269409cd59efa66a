"""Regression datasets: design matrix, responses and optional left-censoring."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Dataset:
    """Design ``x`` (n, p), response ``y`` (n,) and an optional censoring mask.

    Censored rows carry ``y == threshold``; their latent responses lie at or
    below the threshold. Observed rows must be strictly above it.
    """

    x: np.ndarray
    y: np.ndarray
    censored: np.ndarray | None = None
    threshold: float = 0.0
    names: list[str] = field(default_factory=list)
    response_name: str = "y"

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        if self.x.shape[0] != self.y.shape[0]:
            if self.y.size == 0 and self.x.size == 0:
                self.x = self.x.reshape(0, max(len(self.names), 1))
            else:
                raise ValueError(f"x has {self.x.shape[0]} rows but y has {self.y.shape[0]}")
        if not np.all(np.isfinite(self.x)):
            bad = np.argwhere(~np.isfinite(self.x))[0]
            raise ValueError(f"non-finite covariate at row {bad[0]}, column {bad[1]}")
        if not np.all(np.isfinite(self.y)):
            raise ValueError(f"non-finite response at row {int(np.flatnonzero(~np.isfinite(self.y))[0])}")
        if self.censored is not None:
            self.censored = np.asarray(self.censored, dtype=bool).reshape(-1)
            if self.censored.shape != self.y.shape:
                raise ValueError("censored mask must match y")
            if np.any(self.y[~self.censored] <= self.threshold):
                row = int(np.flatnonzero(~self.censored & (self.y <= self.threshold))[0])
                raise ValueError(f"uncensored response at row {row} is not above the threshold")
            self.y = np.where(self.censored, self.threshold, self.y)
        if not self.names:
            self.names = [f"x{j}" for j in range(self.x.shape[1])]
        if len(self.names) != self.x.shape[1]:
            raise ValueError("names must match the number of columns of x")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def is_censored(self) -> bool:
        return self.censored is not None and bool(self.censored.any())

    @property
    def n_uncensored(self) -> int:
        return self.n if self.censored is None else int((~self.censored).sum())

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        cens = None if self.censored is None else self.censored[rows]
        return Dataset(self.x[rows], self.y[rows], cens, self.threshold, list(self.names), self.response_name)


def add_intercept(x, names=None):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(x.shape[1])]
    return np.column_stack([np.ones(x.shape[0]), x]), ["intercept", *names]
