"""Standardized data matrices: the single statistical input of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteInput, ZeroVarianceColumn


@dataclass
class DataMatrix:
    """n x p observation matrix with mean-zero, unit-SD columns.

    Columns are variables (network nodes), rows are samples. Construct via
    :func:`standardize`; direct construction skips validation.
    """

    values: np.ndarray
    column_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DimensionMismatch("expected a 2-d matrix")
        if not self.column_names:
            self.column_names = [f"V{j + 1}" for j in range(self.p)]
        if len(self.column_names) != self.p:
            raise DimensionMismatch(
                f"{len(self.column_names)} names for {self.p} columns"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def n_candidate_edges(self) -> int:
        return self.p * (self.p - 1) // 2


def standardize(raw, column_names=None) -> DataMatrix:
    """Center each column to mean 0 and scale to SD 1 (denominator n-1).

    Raises NonFiniteInput for NaN/inf entries and ZeroVarianceColumn for
    constant columns. Column order and names are preserved.
    """
    x = np.asarray(raw, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch("expected a 2-d matrix")
    n, p = x.shape
    if n < 2 or p < 2:
        raise DimensionMismatch(f"need n >= 2 and p >= 2, got {n} x {p}")
    bad = ~np.isfinite(x)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise NonFiniteInput(int(r), int(c))
    sd = x.std(axis=0, ddof=1)
    zero = np.flatnonzero(sd == 0.0)
    if zero.size:
        raise ZeroVarianceColumn(int(zero[0]))
    out = (x - x.mean(axis=0)) / sd
    names = list(column_names) if column_names is not None else None
    return DataMatrix(out, names or [])
