"""Dataset container consumed by every pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError


@dataclass
class Dataset:
    """Design matrix X (n rows, d features) with targets y (length n).

    ``normalized`` records that rows were scaled to unit l2 norm.
    ``bounded`` asserts max |X_ij| <= 1 at construction time, matching the
    bounded-data assumption the complexity bounds rely on.
    """

    X: np.ndarray
    y: np.ndarray
    normalized: bool = False
    bounded: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2:
            raise DimensionMismatch(f"X must be 2-d, got shape {self.X.shape}")
        if self.y.ndim != 1:
            raise DimensionMismatch(f"y must be 1-d, got shape {self.y.shape}")
        n, d = self.X.shape
        if n < 1 or d < 1:
            raise DomainError(f"need n >= 1 and d >= 1, got X shape {self.X.shape}")
        if self.y.shape[0] != n:
            raise DimensionMismatch(
                f"y has length {self.y.shape[0]} but X has {n} rows"
            )
        if not np.all(np.isfinite(self.X)) or not np.all(np.isfinite(self.y)):
            raise DomainError("X and y entries must all be finite")
        if self.bounded and np.max(np.abs(self.X)) > 1.0 + 1e-12:
            raise DomainError(
                f"bounded dataset violates max |X_ij| <= 1 (max is {np.max(np.abs(self.X)):.6g})"
            )

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def rank(self, rtol: float = 1e-10) -> int:
        """Numerical rank of X (singular values above rtol * largest)."""
        s = np.linalg.svd(self.X, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.sum(s > rtol * s[0]))
