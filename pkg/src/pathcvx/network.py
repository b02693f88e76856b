"""Two-layer ReLU networks reconstructed from convex block solutions.

The network is f(x) = (1/m) sum_k a_k relu(<w_k, x>).  A block solution maps
to it by keeping blocks with nonzero mass: w_k = u / ||u||_1 and
a_k = +- m ||u||_1 with the sign of the block orientation.  On cone-feasible
solutions this map preserves both fitted values and the regularizer, so the
convex objective equals the nonconvex path-norm objective exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError
from .solver import BlockSolution, ConvexProgram, _check_solution


@dataclass
class TwoLayerNet:
    """Width-m network with outer weights a (m,) and inner rows W (m, d)."""

    m: int
    a: np.ndarray
    W: np.ndarray
    width_ok: bool | None = None  # m >= n+1 over-parameterization report

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float).reshape(self.m)
        self.W = np.asarray(self.W, dtype=float).reshape(self.m, -1) if self.m else \
            np.asarray(self.W, dtype=float).reshape(0, -1)

    @property
    def d(self) -> int:
        return self.W.shape[1]


@dataclass
class PathNormReport:
    path_norm: float
    contributions: np.ndarray  # per neuron, |a_k| ||w_k||_1 / m


def reconstruct(sol: BlockSolution, program: ConvexProgram,
                zero_threshold: float | None = None) -> TwoLayerNet:
    """Network from the nonzero blocks of a solution.

    ``zero_threshold`` defaults to 1e-6 times the largest block l1 norm;
    splitting solvers leave dust in inactive blocks.  An empty network
    (m = 0, identically zero) is a valid result at large lam.
    """
    u = _check_solution(program, sol)
    if zero_threshold is not None and zero_threshold < 0:
        raise DomainError("zero_threshold must be >= 0")
    l1 = np.abs(u).sum(axis=1)
    if zero_threshold is None:
        zero_threshold = 1e-6 * float(l1.max(initial=0.0))
    keep = l1 > zero_threshold
    m = int(keep.sum())
    if m == 0:
        return TwoLayerNet(0, np.zeros(0), np.zeros((0, program.d)),
                           width_ok=0 >= program.n + 1)
    norms = l1[keep]
    W = u[keep] / norms[:, None]
    a = program.orientations[keep] * m * norms
    return TwoLayerNet(m, a, W, width_ok=bool(m >= program.n + 1))


def forward(net: TwoLayerNet, X: np.ndarray) -> np.ndarray:
    """(1/m) sum_k a_k relu(X w_k) per row; the zero vector when m = 0."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-d, got shape {X.shape}")
    if net.m == 0:
        return np.zeros(X.shape[0])
    if X.shape[1] != net.d:
        raise DimensionMismatch(f"X has {X.shape[1]} columns, net expects {net.d}")
    return np.maximum(X @ net.W.T, 0.0) @ net.a / net.m


def path_norm(net: TwoLayerNet) -> PathNormReport:
    """(1/m) sum_k |a_k| ||w_k||_1, with per-neuron contributions."""
    if net.m == 0:
        return PathNormReport(0.0, np.zeros(0))
    contrib = np.abs(net.a) * np.abs(net.W).sum(axis=1) / net.m
    return PathNormReport(float(contrib.sum()), contrib)


def truncate(v, B: float):
    """Elementwise clamp to [-B, B]; defined for B >= 1."""
    if not (np.isfinite(B) and B >= 1.0):
        raise DomainError(f"truncation level must satisfy B >= 1, got {B}")
    return np.clip(np.asarray(v, dtype=float), -B, B)


def mse(pred, y) -> float:
    pred = np.asarray(pred, dtype=float)
    y = np.asarray(y, dtype=float)
    if pred.shape != y.shape:
        raise DimensionMismatch(f"shape mismatch {pred.shape} vs {y.shape}")
    diff = pred - y
    return float(diff @ diff) / diff.shape[0]


def nonconvex_objective(net: TwoLayerNet, X: np.ndarray, y: np.ndarray,
                        lam: float) -> float:
    """Path-norm regularized empirical risk of an explicit network."""
    return mse(forward(net, X), y) + lam * path_norm(net).path_norm
