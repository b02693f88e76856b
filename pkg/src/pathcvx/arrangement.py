"""ReLU activation-pattern enumeration for a data matrix.

A pattern is the boolean vector [1{x_i^T w >= 0}]_i over the rows of X for
some witness w.  Distinct patterns are exactly the regions of the central
hyperplane arrangement generated by the rows, so their number is polynomial
in n for fixed rank and they can be enumerated exactly when the data is
low-rank, or sampled with random Gaussian witnesses otherwise.

The exact enumerator inserts hyperplanes one at a time and splits only the
regions the new hyperplane crosses.  Crossed regions are located by
enumerating the restriction of the earlier hyperplanes to the new one (a
rank r-1 arrangement), which avoids a linear program per candidate sign
vector.  A slower LP-certified incremental enumerator is kept as a fallback
for degenerate geometry and as an independent cross-check in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .data import Dataset
from .errors import BudgetExceeded, DegenerateRow, DomainError

_MARGIN_TOL = 1e-9  # feasibility threshold for the max-margin LP
_COLLINEAR_TOL = 1e-12


@dataclass(frozen=True)
class ActivationPattern:
    """One activation mask together with a validating witness.

    ``degenerate`` marks patterns whose witness cannot have a strict margin
    on every row (only possible when the data contains zero rows).
    """

    mask: np.ndarray
    witness: np.ndarray
    degenerate: bool = False

    def mask_string(self) -> str:
        return "".join("1" if b else "0" for b in self.mask)


@dataclass
class PatternSet:
    """Ordered, deduplicated activation patterns of one dataset."""

    patterns: list = field(default_factory=list)
    rank_r: int = 0
    enumeration_mode: str = "exact"
    sample_budget: int = 0
    seed: int = 0

    def __len__(self) -> int:
        return len(self.patterns)

    def masks(self) -> np.ndarray:
        """Stack of all masks, shape (P, n), dtype bool."""
        return np.array([p.mask for p in self.patterns], dtype=bool)

    def witnesses(self) -> np.ndarray:
        return np.array([p.witness for p in self.patterns], dtype=float)


def pattern_bound(n: int, r: int) -> float:
    """Upper bound 2r(e(n-1)/r)^r on the number of activation patterns."""
    if n < 2:
        raise DomainError(f"pattern_bound requires n >= 2, got n={n}")
    if r < 1:
        raise DomainError(f"pattern_bound requires r >= 1, got r={r}")
    return float(2.0 * r * (math.e * (n - 1) / r) ** r)


def exact_region_count(n: int, r: int) -> int:
    """Region count 2 * sum_{k<r} C(n-1, k) of a generic central arrangement."""
    if n < 1 or r < 1:
        raise DomainError(f"need n >= 1 and r >= 1, got n={n}, r={r}")
    return 2 * sum(math.comb(n - 1, k) for k in range(r))


def witness(pattern_mask, data: Dataset, tol: float = _MARGIN_TOL):
    """Best strict witness for a mask, or None when the mask is infeasible.

    Maximizes the minimum signed margin min_i s_i x_i^T w over the box
    ||w||_inf <= 1, with s_i = +1 where the mask is set and -1 elsewhere.
    """
    mask = np.asarray(pattern_mask, dtype=bool)
    if mask.shape != (data.n,):
        raise DomainError(f"mask length {mask.shape} does not match n={data.n}")
    s = np.where(mask, 1.0, -1.0)
    t, w = _max_margin_lp(s[:, None] * data.X)
    if t <= tol:
        return None
    return w


def enumerate_patterns(
    data: Dataset, mode: str = "exact", budget: int = 100_000, seed: int = 0
) -> PatternSet:
    """All attainable patterns (exact) or a sampled, deduplicated subset.

    Exact mode requires the generic region count 2 sum_{k<r} C(n-1, k) to fit
    in ``budget`` and refuses zero rows.  Sampled mode draws ``budget``
    standard Gaussian witnesses; zero rows are flagged, not fatal.  Pattern
    complements are not added; the +/- orientation doubling happens when the
    convex program is assembled.  Output order is canonical (lexicographic by
    mask bits) so results are reproducible.
    """
    if mode not in ("exact", "sampled"):
        raise DomainError(f"unknown enumeration mode {mode!r}")
    if budget < 1:
        raise DomainError(f"budget must be positive, got {budget}")
    X = data.X
    n = data.n
    row_norms = np.linalg.norm(X, axis=1)
    zero_rows = row_norms <= _COLLINEAR_TOL * max(1.0, float(row_norms.max()))

    if mode == "exact":
        if zero_rows.any():
            bad = int(np.flatnonzero(zero_rows)[0])
            raise DegenerateRow(f"row {bad} of X is zero; exact mode needs strict margins")
        rows_r, basis, r = _rowspace(X)
        count = exact_region_count(n, r)
        if count > budget:
            raise BudgetExceeded(
                f"exact region count {count} exceeds budget {budget} (n={n}, rank={r})"
            )
        try:
            signs, wits = _enum_signs(rows_r)
        except _DegenerateArrangement:
            signs, wits = _enum_signs_lp(rows_r)
        masks = signs > 0
        W = wits @ basis.T
        order = _canonical_order(masks)
        patterns = [
            ActivationPattern(mask=masks[i].copy(), witness=_box_scale(W[i]))
            for i in order
        ]
        return PatternSet(patterns, rank_r=r, enumeration_mode="exact",
                          sample_budget=budget, seed=seed)

    # sampled
    r = data.rank()
    rng = np.random.default_rng(seed)
    live = ~zero_rows
    masks_chunks = []
    wit_chunks = []
    done = 0
    while done < budget:
        m = min(budget - done, 200_000)
        W = rng.standard_normal((m, data.d))
        margins = W @ X.T
        # draws landing on a live hyperplane define no pattern (measure zero)
        tie = np.any(np.abs(margins[:, live]) <= _COLLINEAR_TOL, axis=1) if live.any() else \
            np.zeros(m, dtype=bool)
        keep = ~tie
        masks_chunks.append(margins[keep] >= 0.0)
        wit_chunks.append(W[keep])
        done += m
    all_masks = np.vstack(masks_chunks) if masks_chunks else np.zeros((0, n), bool)
    all_wits = np.vstack(wit_chunks) if wit_chunks else np.zeros((0, data.d))
    degenerate = bool(zero_rows.any())
    if all_masks.shape[0] == 0:
        return PatternSet([], rank_r=r, enumeration_mode="sampled",
                          sample_budget=budget, seed=seed)
    uniq, first = np.unique(all_masks, axis=0, return_index=True)  # lexicographic
    patterns = [
        ActivationPattern(mask=uniq[i].copy(), witness=_box_scale(all_wits[first[i]]),
                          degenerate=degenerate)
        for i in range(uniq.shape[0])
    ]
    return PatternSet(patterns, rank_r=r, enumeration_mode="sampled",
                      sample_budget=budget, seed=seed)


# ---------------------------------------------------------------------------
# internals


class _DegenerateArrangement(Exception):
    """Geometry too degenerate for the restriction-based enumerator."""


def _rowspace(X: np.ndarray):
    """Orthonormal row-space coordinates: (X @ basis, basis, rank)."""
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise DegenerateRow("X is identically zero")
    r = int(np.sum(s > 1e-10 * s[0]))
    basis = Vt[:r].T  # (d, r)
    return X @ basis, basis, r


def _box_scale(w: np.ndarray) -> np.ndarray:
    """Scale a witness so ||w||_inf = 1 (signs are scale invariant)."""
    m = np.max(np.abs(w))
    return w / m if m > 0 else w.copy()


def _canonical_order(masks: np.ndarray) -> np.ndarray:
    """Indices sorting masks lexicographically by bits (column 0 primary)."""
    if masks.shape[0] == 0:
        return np.zeros(0, dtype=int)
    return np.lexsort(masks.T[::-1])


def _enum_signs(rows: np.ndarray):
    """Sign vectors and witnesses of all regions of the central arrangement.

    ``rows`` is (n, r) in row-space coordinates with no zero rows.  Returns
    (signs (R, n) int8 with entries +-1, witnesses (R, r)).  Raises
    _DegenerateArrangement when a strict-margin decision falls below
    tolerance; the caller then reruns the LP-certified enumerator.
    """
    n, r = rows.shape
    norms = np.linalg.norm(rows, axis=1)
    if r == 1:
        s = np.where(rows[:, 0] > 0, 1, -1).astype(np.int8)
        return np.stack([s, -s]), np.array([[1.0], [-1.0]])

    w0 = rows[0] / norms[0]
    signs = np.array([[1], [-1]], dtype=np.int8)
    wits = np.stack([w0, -w0])
    for k in range(1, n):
        xk = rows[k]
        nk = norms[k]
        margins = wits @ xk
        cos = np.abs(rows[:k] @ xk) / (norms[:k] * nk)
        if cos.max() >= 1.0 - _COLLINEAR_TOL:
            # duplicate hyperplane: nothing is cut, signs are forced
            if np.min(np.abs(margins)) <= _COLLINEAR_TOL * nk:
                raise _DegenerateArrangement
            col = np.where(margins > 0, 1, -1).astype(np.int8)
            signs = np.hstack([signs, col[:, None]])
            continue

        # regions crossed by hyperplane k = regions of the restriction of the
        # first k hyperplanes to it (a rank r-1 central arrangement)
        _, _, Vt = np.linalg.svd(xk[None, :])
        Q = Vt[1:].T  # (r, r-1) orthonormal basis of the hyperplane
        sub_rows = rows[:k] @ Q
        sub_norms = np.linalg.norm(sub_rows, axis=1)
        if sub_norms.min() <= _COLLINEAR_TOL * norms[:k].max():
            raise _DegenerateArrangement
        sub_signs, sub_wits = _enum_signs(sub_rows)
        cut = {sub_signs[i].tobytes(): sub_wits[i] for i in range(sub_signs.shape[0])}

        xhat = xk / nk
        max_norm = float(norms[: k + 1].max())
        keep_idx = []
        cut_idx = []
        for i in range(signs.shape[0]):
            if signs[i].tobytes() in cut:
                cut_idx.append(i)
            else:
                keep_idx.append(i)
        keep_idx = np.array(keep_idx, dtype=int)
        cut_idx = np.array(cut_idx, dtype=int)

        if keep_idx.size:
            m_keep = margins[keep_idx]
            if np.min(np.abs(m_keep)) <= _COLLINEAR_TOL * nk:
                raise _DegenerateArrangement
        R_new = keep_idx.size + 2 * cut_idx.size
        new_signs = np.empty((R_new, k + 1), dtype=np.int8)
        new_wits = np.empty((R_new, r))
        if keep_idx.size:
            new_signs[: keep_idx.size, :k] = signs[keep_idx]
            new_signs[: keep_idx.size, k] = np.where(margins[keep_idx] > 0, 1, -1)
            new_wits[: keep_idx.size] = wits[keep_idx]
        pos = keep_idx.size
        for i in cut_idx:
            v = Q @ cut[signs[i].tobytes()]
            delta = float(np.min(np.abs(rows[:k] @ v)))
            eps = delta / (2.0 * max_norm)
            for sgn in (1, -1):
                new_signs[pos, :k] = signs[i]
                new_signs[pos, k] = sgn
                new_wits[pos] = v + sgn * eps * xhat
                pos += 1
        signs, wits = new_signs, new_wits
    return signs, wits


def _max_margin_lp(signed_rows: np.ndarray):
    """max t s.t. signed_rows @ w >= t, ||w||_inf <= 1; returns (t, w)."""
    k, r = signed_rows.shape
    A_ub = np.hstack([-signed_rows, np.ones((k, 1))])
    c = np.zeros(r + 1)
    c[-1] = -1.0
    bounds = [(-1.0, 1.0)] * r + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k), bounds=bounds, method="highs")
    if not res.success:
        return -np.inf, np.zeros(r)
    return float(res.x[-1]), res.x[:r].copy()


def _enum_signs_lp(rows: np.ndarray):
    """Incremental enumerator certifying every sign vector with the witness LP.

    Slower than _enum_signs (one LP per undecided candidate) but makes no
    genericity assumption beyond nonzero rows.
    """
    n, r = rows.shape
    regions = [(np.array([1], dtype=np.int8),), (np.array([-1], dtype=np.int8),)]
    t, w = _max_margin_lp(rows[:1])
    if t <= _MARGIN_TOL:
        raise DegenerateRow("first row admits no strict margin")
    regions = [(np.array([1], dtype=np.int8), w), (np.array([-1], dtype=np.int8), -w)]
    for k in range(1, n):
        xk = rows[k]
        new_regions = []
        for s, wit in regions:
            m = float(wit @ xk)
            candidates = []
            if abs(m) > _MARGIN_TOL:
                own = 1 if m > 0 else -1
                new_regions.append((np.append(s, np.int8(own)), wit))
                candidates.append(-own)
            else:
                candidates.extend([1, -1])
            for cand in candidates:
                s_ext = np.append(s, np.int8(cand)).astype(np.int8)
                t, w = _max_margin_lp(s_ext[:, None] * rows[: k + 1])
                if t > _MARGIN_TOL:
                    new_regions.append((s_ext, w))
        regions = new_regions
    signs = np.array([s for s, _ in regions], dtype=np.int8)
    wits = np.array([w for _, w in regions])
    return signs, wits
