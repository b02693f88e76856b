"""Infinite-width two-layer ReLU NTK and kernel ridge regression baseline.

Kernel convention (bias-free, both layers trained):

    K(x, x') = ||x|| ||x'|| (u k0(u) + k1(u)),   u = cos(x, x') in [-1, 1],
    k0(u) = (pi - arccos u) / pi,
    k1(u) = (sqrt(1 - u^2) + u (pi - arccos u)) / pi.

This matches the network family being trained and is recorded in output
metadata since other parameterizations (bias, single trained layer) rescale
the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionMismatch, SingularSystem

KERNEL_CONVENTION = "relu2-ntk-bias-free-both-layers"


@dataclass
class KernelMatrix:
    K: np.ndarray
    jitter: float = 0.0

    @property
    def n(self) -> int:
        return self.K.shape[0]


def _kappa(u: np.ndarray):
    u = np.clip(u, -1.0, 1.0)
    theta = np.arccos(u)
    k0 = (np.pi - theta) / np.pi
    k1 = (np.sqrt(np.maximum(0.0, 1.0 - u * u)) + u * (np.pi - theta)) / np.pi
    return k0, k1


def ntk_value(x, x2) -> float:
    """Kernel value for one pair; zero whenever either vector is zero."""
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    nx = float(np.linalg.norm(x))
    n2 = float(np.linalg.norm(x2))
    if nx == 0.0 or n2 == 0.0:
        return 0.0
    u = float(x @ x2) / (nx * n2)
    k0, k1 = _kappa(np.array(u))
    return float(nx * n2 * (u * k0 + k1))


def _cross_gram(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    scale = np.outer(na, nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(scale > 0.0, (A @ B.T) / scale, 0.0)
    u = np.clip(u, -1.0, 1.0)
    k0, k1 = _kappa(u)
    return np.where(scale > 0.0, scale * (u * k0 + k1), 0.0)


def gram(X: np.ndarray) -> KernelMatrix:
    """Pairwise kernel matrix; upper triangle computed and mirrored."""
    X = np.asarray(X, dtype=float)
    if np.isnan(X).any():
        raise DimensionMismatch("gram does not accept NaN rows")
    full = _cross_gram(X, X)
    K = np.triu(full) + np.triu(full, 1).T
    return KernelMatrix(K=K, jitter=0.0)


def krr_fit(km: KernelMatrix, y: np.ndarray, lam: float) -> np.ndarray:
    """Dual coefficients solving (K + lam n I) alpha = y.

    The ridge scale lam * n matches the (1/n)-averaged empirical risk.
    Jitter escalates by tens from 1e-14 * trace/n up to 1e-6 * trace/n
    before giving up with SingularSystem.
    """
    y = np.asarray(y, dtype=float)
    n = km.n
    if y.shape != (n,):
        raise DimensionMismatch(f"y has shape {y.shape}, kernel is {n}x{n}")
    base = km.K + lam * n * np.eye(n)
    scale = max(float(np.trace(km.K)) / n, 1e-300)
    jitter = 0.0
    while True:
        try:
            fac = cho_factor(base + jitter * np.eye(n), lower=True)
            alpha = cho_solve(fac, y)
            if np.isfinite(alpha).all():
                km.jitter = jitter
                return alpha
        except np.linalg.LinAlgError:
            pass
        jitter = 1e-14 * scale if jitter == 0.0 else jitter * 10.0
        if jitter > 1e-6 * scale:
            raise SingularSystem(
                f"kernel system singular even with jitter {jitter:.2e}"
            )


def krr_predict(alpha: np.ndarray, X_train: np.ndarray, X_test: np.ndarray) -> np.ndarray:
    """Predictions K(test, train) @ alpha."""
    alpha = np.asarray(alpha, dtype=float)
    X_train = np.asarray(X_train, dtype=float)
    X_test = np.asarray(X_test, dtype=float)
    if X_train.shape[0] != alpha.shape[0]:
        raise DimensionMismatch(
            f"alpha has length {alpha.shape[0]} but train set has {X_train.shape[0]} rows"
        )
    if X_train.shape[1] != X_test.shape[1]:
        raise DimensionMismatch(
            f"train has {X_train.shape[1]} features, test has {X_test.shape[1]}"
        )
    return _cross_gram(X_test, X_train) @ alpha
