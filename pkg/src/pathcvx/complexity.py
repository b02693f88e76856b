"""Monte-Carlo capacity diagnostics for the path-norm function class.

The exact Gaussian complexity of { f : path norm <= R } needs a nonconvex
sup over the unit l1 ball, so it is sandwiched instead: the upper surrogate
2R E || (1/n) sum_i xi_i x_i ||_inf comes from peeling the ReLU via
contraction and Hoelder, and the lower surrogate restricts the sup to the
signed coordinate directions {+-e_j}, a subset of the l1 ball.  Both are
estimated on shared Gaussian draws with standard errors.  The metric
entropy side is probed constructively by greedy packing of sampled unit
path-norm neurons in the empirical L2 metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DomainError, GridError


@dataclass
class ComplexityEstimate:
    mean: float
    stderr: float
    trials: int
    kind: str       # "upper" | "coordinate-lower"
    seed: int


def gaussian_bound(R: float, d: int, n: int) -> float:
    """Closed-form complexity bound 2R sqrt(2 ln d / n); zero at d = 1."""
    if R < 0:
        raise DomainError("R must be >= 0")
    if d < 1 or n < 1:
        raise DomainError("d and n must be >= 1")
    return float(2.0 * R * np.sqrt(2.0 * np.log(d) / n))


def gaussian_complexity_mc(data: Dataset, R: float, trials: int, seed: int = 0):
    """Paired upper/lower surrogates of the Gaussian complexity of G_R.

    Returns (upper, lower) ComplexityEstimates computed on the same draws:
      upper_t = 2R || (1/n) sum xi_i x_i ||_inf
      lower_t = R max_{w in {+-e_j}} | (1/n) sum xi_i relu(w^T x_i) |
    """
    if trials < 2:
        raise DomainError("trials must be >= 2")
    X = data.X
    n = data.n
    xp = np.maximum(X, 0.0)       # relu(+e_j^T x_i) per coordinate
    xm = np.maximum(-X, 0.0)      # relu(-e_j^T x_i)
    rng = np.random.default_rng(seed)
    upper_vals = np.empty(trials)
    lower_vals = np.empty(trials)
    done = 0
    while done < trials:
        m = min(trials - done, 10_000)
        xi = rng.standard_normal((m, n))
        lin = xi @ X / n          # (m, d)
        upper_vals[done:done + m] = 2.0 * R * np.abs(lin).max(axis=1)
        lp = np.abs(xi @ xp / n)
        lm = np.abs(xi @ xm / n)
        lower_vals[done:done + m] = R * np.maximum(lp.max(axis=1), lm.max(axis=1))
        done += m
    upper = ComplexityEstimate(float(upper_vals.mean()),
                               float(upper_vals.std(ddof=1) / np.sqrt(trials)),
                               trials, "upper", seed)
    lower = ComplexityEstimate(float(lower_vals.mean()),
                               float(lower_vals.std(ddof=1) / np.sqrt(trials)),
                               trials, "coordinate-lower", seed)
    return upper, lower


def entropy_exponent(d: int) -> float:
    """Metric-entropy exponent q = 2d / (d + 2), increasing toward 2."""
    if d < 1:
        raise DomainError("d must be >= 1")
    return 2.0 * d / (d + 2.0)


def regularization_bound(R_target: float, lam: float, m: int) -> float:
    """Regularization-error bound lam * R + 3 R^2 / m."""
    if R_target < 0 or lam < 0:
        raise DomainError("R_target and lam must be >= 0")
    if m < 1:
        raise DomainError("m must be >= 1")
    return float(lam * R_target + 3.0 * R_target * R_target / m)


def covering_exponent_probe(d: int, eps_grid, sample_points: int,
                            neuron_samples: int, seed: int = 0):
    """Greedy packing counts of sampled unit-path-norm neurons per epsilon.

    Draws bounded inputs, draws signed single neurons +-relu(w^T .) with
    ||w||_1 = 1, and packs them greedily in the empirical L2 metric at each
    epsilon of the (strictly decreasing) grid.  Packings are nested across
    the grid, so counts are nondecreasing as epsilon shrinks.  Returns
    (table, slope) where table is a list of (eps, count) and slope is the
    least-squares slope of log(count) against log(1/eps).  Packing lower
    bounds covering, so the slope is a lower probe of the covering exponent.
    """
    if d < 2:
        raise DomainError("covering probe needs d >= 2")
    eps_grid = [float(e) for e in eps_grid]
    if len(eps_grid) == 0:
        raise GridError("empty epsilon grid")
    if any(e <= 0.0 or e > 1.0 for e in eps_grid):
        raise GridError("epsilon grid must lie in (0, 1]")
    if not all(b < a for a, b in zip(eps_grid, eps_grid[1:])):
        raise GridError("epsilon grid must be strictly decreasing")
    if sample_points < 1 or neuron_samples < 1:
        raise DomainError("sample_points and neuron_samples must be >= 1")

    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(sample_points, d))
    g = rng.exponential(1.0, size=(neuron_samples, d))
    w = rng.choice([-1.0, 1.0], size=(neuron_samples, d)) * g / g.sum(axis=1, keepdims=True)
    out_sign = rng.choice([-1.0, 1.0], size=neuron_samples)
    feats = out_sign[:, None] * np.maximum(pts @ w.T, 0.0).T   # (neurons, points)

    in_pack = np.zeros(neuron_samples, dtype=bool)
    counts = []
    for eps in eps_grid:
        # nested: a packing at larger eps stays a valid packing at smaller eps
        for i in range(neuron_samples):
            if in_pack[i]:
                continue
            if in_pack.any():
                diff = feats[in_pack] - feats[i]
                if np.sqrt((diff * diff).mean(axis=1)).min() < eps:
                    continue
            in_pack[i] = True
        counts.append(int(in_pack.sum()))
    table = list(zip(eps_grid, counts))
    logs = np.log([1.0 / e for e in eps_grid])
    logc = np.log(np.maximum(counts, 1))
    if len(eps_grid) >= 2 and np.ptp(logs) > 0:
        slope = float(np.polyfit(logs, logc, 1)[0])
    else:
        slope = 0.0
    return table, slope
