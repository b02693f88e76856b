"""Convex program over activation patterns and its operator-splitting solver.

The training objective

    (1/n) || sum_i s_i D_i X u_i - y ||^2  +  lam * sum_i ||u_i||_1
                                           +  lam_tilde * sum_i ||u_i||_2^2

is minimized over 2P blocks u_i constrained to the cones
C_i = { u : (2 D_i - I) X u >= 0 }, where D_i is the diagonal 0/1 mask of
pattern i and blocks i and i+P share mask and cone with orientations
s_i = +1 and -1.  ``solve`` runs consensus ADMM: per-block slacks carry the
cone projection and the l1 soft threshold, and the coupled least-squares
step is solved through a cached factorization.  Because the cone signs
square to one, every block shares the same d x d normal-equations core, and
the cross-block coupling reduces to an n x n system via the matrix
inversion lemma, so iterations cost O(n d P) regardless of the block count.

``solve_oracle`` is a deliberately simple reference solver (projected
gradient on the lifted u = u+ - u- formulation with Dykstra projections)
used to certify ``solve`` on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _backend
from .arrangement import PatternSet
from .data import Dataset
from .errors import DimensionMismatch, DomainError, EmptyPatternSet, NumericalFailure


@dataclass
class ConvexProgram:
    """Assembled 2P-block convex program for one dataset."""

    X: np.ndarray
    y: np.ndarray
    masks: np.ndarray          # (P, n) bool, canonical pattern order
    lam: float
    lam_tilde: float
    witnesses: np.ndarray | None = None  # (P, d), kept for feasible-point construction

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def p(self) -> int:
        return self.masks.shape[0]

    @property
    def n_blocks(self) -> int:
        return 2 * self.p

    @property
    def orientations(self) -> np.ndarray:
        """Block orientations: +1 for blocks 0..P-1, -1 for P..2P-1."""
        return np.concatenate([np.ones(self.p), -np.ones(self.p)])

    def block_mask(self, i: int) -> np.ndarray:
        return self.masks[i % self.p]

    def cone_matrix(self, i: int) -> np.ndarray:
        """Rows A_i = (2 D_i - I) X of the cone constraints for block i."""
        s = np.where(self.block_mask(i), 1.0, -1.0)
        return s[:, None] * self.X


@dataclass
class BlockSolution:
    """Per-block solution vectors, shape (2P, d)."""

    u: np.ndarray

    def block_l1(self) -> np.ndarray:
        return np.abs(self.u).sum(axis=1)


@dataclass
class SolverConfig:
    max_iters: int = 20000
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    feasibility_tol: float = 1e-8
    rho: float = 1.0
    seed: int = 0
    warm_start: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if min(self.abs_tol, self.rel_tol, self.feasibility_tol, self.rho) <= 0:
            raise DomainError("tolerances and rho must be positive")


@dataclass
class SolverDiagnostics:
    iterations: int
    primal_residual: float
    dual_residual: float
    objective: float
    feasibility_violation: float
    status: str  # converged | max_iters | numerical_failure
    rho_final: float = 1.0


def assemble(data: Dataset, patterns: PatternSet, lam: float, lam_tilde: float = 0.0) -> ConvexProgram:
    """Build the 2P-block program (positive orientations first, then negatives)."""
    if len(patterns) == 0:
        raise EmptyPatternSet("cannot assemble a program from zero patterns")
    if not (np.isfinite(lam) and lam >= 0):
        raise DomainError(f"lam must be finite and >= 0, got {lam}")
    if not (np.isfinite(lam_tilde) and lam_tilde >= 0):
        raise DomainError(f"lam_tilde must be finite and >= 0, got {lam_tilde}")
    masks = patterns.masks()
    if masks.shape[1] != data.n:
        raise DimensionMismatch(
            f"patterns are over {masks.shape[1]} rows but dataset has {data.n}"
        )
    return ConvexProgram(
        X=data.X, y=data.y, masks=masks, lam=float(lam), lam_tilde=float(lam_tilde),
        witnesses=patterns.witnesses(),
    )


def _check_solution(program: ConvexProgram, sol: BlockSolution) -> np.ndarray:
    u = np.asarray(sol.u, dtype=float)
    if u.shape != (program.n_blocks, program.d):
        raise DimensionMismatch(
            f"solution has shape {u.shape}, expected {(program.n_blocks, program.d)}"
        )
    return u


def linearized_predictions(program: ConvexProgram, sol: BlockSolution) -> np.ndarray:
    """sum_i s_i D_i X u_i, the fitted values of the convex program."""
    u = _check_solution(program, sol)
    xu = program.X @ u.T                      # (n, 2P)
    p = program.p
    m = program.masks.T.astype(float)          # (n, P)
    return (m * xu[:, :p]).sum(axis=1) - (m * xu[:, p:]).sum(axis=1)


def objective(program: ConvexProgram, sol: BlockSolution, include_l2: bool = True) -> float:
    """Program objective at sol; cone feasibility is not checked."""
    u = _check_solution(program, sol)
    resid = linearized_predictions(program, sol) - program.y
    val = float(resid @ resid) / program.n + program.lam * float(np.abs(u).sum())
    if include_l2:
        val += program.lam_tilde * float((u * u).sum())
    return val


def feasibility_violation(program: ConvexProgram, sol: BlockSolution) -> float:
    """max over blocks and cone rows of max(0, -(A_i u_i)); 0 iff feasible."""
    u = _check_solution(program, sol)
    xu = program.X @ u.T                       # (n, 2P)
    sg = _cone_signs(program)
    return float(np.maximum(0.0, -(sg * xu)).max(initial=0.0))


def _cone_signs(program: ConvexProgram) -> np.ndarray:
    m = program.masks.T.astype(float)          # (n, P)
    s = 2.0 * m - 1.0
    return np.hstack([s, s])                   # (n, 2P)


def _oriented_masks(program: ConvexProgram) -> np.ndarray:
    m = program.masks.T.astype(float)
    return np.hstack([m, -m])                  # (n, 2P)


def _collapse_pairs(program: ConvexProgram, u: np.ndarray) -> np.ndarray:
    """Merge +/- block pairs when the difference stays in their shared cone.

    Blocks j and j+P act on predictions only through u_j - u_{j+P}, so mass
    held by both sides is objective-flat up to the regularizers.  Replacing
    the pair by its difference (when feasible) never changes the fit, never
    increases the l1 term, and is accepted only when the full regularizer
    does not increase.  Splitting solvers routinely leave such dust because
    the l1 drift along the flat direction is slow at tiny lam.
    """
    p = program.p
    out = u.copy()
    X = program.X
    lam, lt = program.lam, program.lam_tilde
    sg = 2.0 * program.masks.astype(float) - 1.0   # (P, n)
    for j in range(p):
        up, um = out[j], out[j + p]
        if not (np.any(up) and np.any(um)):
            continue
        delta = up - um
        old_reg = lam * (np.abs(up).sum() + np.abs(um).sum()) + \
            lt * ((up * up).sum() + (um * um).sum())
        new_reg = lam * np.abs(delta).sum() + lt * (delta * delta).sum()
        if new_reg > old_reg:
            continue
        rows = sg[j] * (X @ delta)
        if rows.min(initial=0.0) >= 0.0:
            out[j], out[j + p] = delta, 0.0
        elif (-rows).min(initial=0.0) >= 0.0:
            out[j], out[j + p] = 0.0, -delta
    return out


def solve(program: ConvexProgram, config: SolverConfig | None = None,
          initial: BlockSolution | None = None):
    """ADMM solve; returns (BlockSolution, SolverDiagnostics).

    Deterministic given (program, config).  Unconverged runs report status
    "max_iters" instead of raising; non-finite iterates raise
    NumericalFailure with partial diagnostics attached.  Convergence is
    declared when both scaled residuals and the cone violation of the
    reported (exactly sparse) iterate are below their tolerances.
    """
    if config is None:
        config = SolverConfig()
    X = np.ascontiguousarray(program.X)
    y = np.ascontiguousarray(program.y)
    n, d = X.shape
    b2 = program.n_blocks
    lam, lt = program.lam, program.lam_tilde
    mask = np.ascontiguousarray(program.masks.T.astype(np.uint8))   # (n, P)

    mf = mask.astype(float)
    mm2 = 2.0 * (mf @ mf.T)                    # sum of m m^T over all 2P blocks
    xtx = X.T @ X

    gty = np.empty((n, b2))
    _backend.broadcast_orient(y, mask, gty)    # orientation-signed y per block
    gty = (2.0 / n) * (X.T @ gty)              # (d, 2P)

    rho = config.rho

    def factor(rho_):
        # hb is d x d and well conditioned (rho I + rho X^T X + 2 lt I), so an
        # explicit inverse keeps the per-iteration block solve a single gemm
        hb = (rho_ + 2.0 * lt) * np.eye(d) + rho_ * xtx
        hb_inv = np.linalg.inv(hb)
        xhixt = X @ hb_inv @ X.T
        s_mat = (n / 2.0) * np.eye(n) + xhixt * mm2
        return hb_inv, cho_factor(s_mat)

    hb_inv, s_fac = factor(rho)

    u = np.zeros((d, b2))
    z1 = np.zeros((d, b2))
    w1 = np.zeros((d, b2))
    zs = np.zeros((n, b2))
    ws = np.zeros((n, b2))
    if config.warm_start and initial is not None:
        u = np.ascontiguousarray(_check_solution(program, initial).T)
        z1 = u.copy()

    xu = np.empty((n, b2))
    tmp = np.empty((n, b2))
    dzw = np.zeros((n, b2))                    # sg (zs - ws), maintained by cone_prox
    dzbuf = np.empty((n, b2))
    swbuf = np.empty((n, b2))
    g = np.empty(n)
    thresh = lam / rho
    sqrt_pri = np.sqrt(b2 * (d + n))
    sqrt_dual = np.sqrt(b2 * d)
    check_every = 1 if n * b2 <= 200_000 else 10

    it = 0
    pri = dual = np.inf
    for it in range(1, config.max_iters + 1):
        check = (it % check_every == 0) or it == config.max_iters

        # coupled least-squares step via the inversion lemma
        rhs = gty + rho * (z1 - w1) + rho * (X.T @ dzw)
        t1 = hb_inv @ rhs
        np.matmul(X, t1, out=xu)
        _backend.rowsum_orient(xu, mask, g)
        t3 = cho_solve(s_fac, g, check_finite=False)
        _backend.broadcast_orient(t3, mask, tmp)
        u = t1 - hb_inv @ (X.T @ tmp)
        np.matmul(X, u, out=xu)

        # prox steps: soft threshold for l1, nonnegative clip for the cones
        v = u + w1
        if check:
            z1_old = z1.copy()
        _backend.soft_threshold(v, thresh, z1)
        w1 = v - z1
        rs_sq, au_sq, zs_sq = _backend.cone_prox(
            xu, mask, zs, ws, dzw, dzbuf, swbuf, 1 if check else 0)
        r1 = u - z1
        pri = float(np.sqrt(float(np.dot(r1.ravel(), r1.ravel())) + rs_sq))

        if not np.isfinite(pri):
            diag = SolverDiagnostics(it, pri, float(dual), np.nan, np.nan,
                                     "numerical_failure", rho)
            raise NumericalFailure("solver produced non-finite iterates", diag)

        if not check:
            continue

        dz = (z1 - z1_old) + X.T @ dzbuf
        dual = rho * float(np.linalg.norm(dz))
        mtw = w1 + X.T @ swbuf
        norm_ax = np.sqrt(float(np.dot(u.ravel(), u.ravel())) + au_sq)
        norm_z = np.sqrt(float(np.dot(z1.ravel(), z1.ravel())) + zs_sq)
        eps_pri = sqrt_pri * config.abs_tol + config.rel_tol * max(norm_ax, norm_z)
        eps_dual = sqrt_dual * config.abs_tol + config.rel_tol * rho * float(np.linalg.norm(mtw))

        if pri <= eps_pri and dual <= eps_dual:
            np.matmul(X, z1, out=xu)
            viol = _backend.cone_violation(xu, mask)
            if viol <= config.feasibility_tol:
                sol = BlockSolution(u=_collapse_pairs(program, np.ascontiguousarray(z1.T)))
                diag = SolverDiagnostics(it, pri, dual, objective(program, sol),
                                         feasibility_violation(program, sol),
                                         "converged", rho)
                return sol, diag

        # residual balancing keeps the two residuals within a factor of ten
        if pri > 10.0 * dual and rho < 1e8:
            scale = 0.5
        elif dual > 10.0 * pri and rho > 1e-8:
            scale = 2.0
        else:
            scale = 1.0
        if scale != 1.0:
            rho /= scale
            w1 *= scale
            ws *= scale
            dzw += (1.0 - scale) * swbuf
            thresh = lam / rho
            hb_inv, s_fac = factor(rho)

    sol = BlockSolution(u=_collapse_pairs(program, np.ascontiguousarray(z1.T)))
    viol = feasibility_violation(program, sol)
    diag = SolverDiagnostics(it, float(pri), float(dual), objective(program, sol),
                             viol, "max_iters", rho)
    return sol, diag


def solve_oracle(program: ConvexProgram, iters: int = 20000,
                 proj_cycles: int = 30) -> BlockSolution:
    """Reference solve: projected gradient on the lifted split u = u+ - u-.

    The l1 term becomes linear after the split, leaving a smooth objective
    over the intersection of the nonnegative orthant with the cone rows.
    Projections run Dykstra's alternating scheme over the orthant and each
    half-space; steps diminish over time; the best exactly-evaluated
    feasible iterate wins.  Intended for small instances (2P*d <= ~200).
    The loop is jitted when numba is importable and falls back to numpy
    otherwise.
    """
    X = np.ascontiguousarray(program.X)
    y = np.ascontiguousarray(program.y)
    n, d = X.shape
    b2 = program.n_blocks
    lam, lt = program.lam, program.lam_tilde
    os_ = _oriented_masks(program)
    sg = _cone_signs(program)
    row_sq = (X * X).sum(axis=1)               # ||x_j||^2 per cone row

    def g_apply(delta):                        # (d, 2P) -> (n,)
        return (os_ * (X @ delta)).sum(axis=1)

    def gt_apply(v):                           # (n,) -> (d, 2P)
        return X.T @ (os_ * v[:, None])

    # Lipschitz constant of the lifted smooth part via power iteration;
    # seeded random start avoids landing in the null space of G
    delta = np.random.default_rng(0).standard_normal((d, b2))
    lmax = 0.0
    for _ in range(80):
        delta = (2.0 / n) * gt_apply(g_apply(delta)) + 2.0 * lt * delta
        nrm = float(np.linalg.norm(delta))
        if nrm == 0.0:
            break
        lmax = nrm
        delta /= nrm
    fro_g2 = float((os_ * os_ * row_sq[:, None]).sum())   # ||G||_F^2
    fro = 2.0 * ((2.0 / n) * fro_g2 + 2.0 * lt)
    lip = 2.0 * lmax * 1.1 if lmax > 1e-12 * max(fro, 1.0) else max(fro, 1e-8)
    t0 = float(max(1, 4 * iters))

    mask = np.ascontiguousarray(program.masks.T.astype(np.uint8))
    best_u, _ = _backend.oracle_loop(X, y, mask, lam, lt, lip, int(iters), t0,
                                     int(proj_cycles))
    if not np.isfinite(best_u).all():
        raise NumericalFailure("oracle produced non-finite iterates")
    return BlockSolution(_collapse_pairs(program, best_u))
