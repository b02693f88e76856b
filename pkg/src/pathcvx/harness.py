"""End-to-end experiments: data generation, CSV ingestion, rate sweeps.

A sweep trains the convex path-norm learner and the NTK ridge baseline over
a grid of training sizes and seeds, recording train/test MSE, path norm,
width, solver effort, and the gap between the convex objective and the
reconstructed network's objective.  Records and CSV output are emitted in a
fixed (n, seed, method) order so reruns are bit-identical.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from . import ntk as ntk_mod
from .arrangement import enumerate_patterns, exact_region_count
from .data import Dataset
from .errors import DomainError, MissingLabel, ParseError, PathCvxError
from .network import forward, mse, path_norm, reconstruct, truncate
from .solver import SolverConfig, assemble, objective, solve

CSV_COLUMNS = ["n", "seed", "method", "train_mse", "test_mse", "path_norm",
               "width", "iters", "duality_gap", "wall_ms"]
LARGE_TEST_SIZE = 10_000


@dataclass
class TargetInfo:
    w_star: np.ndarray
    description: str = "relu(<w*, x>) with x uniform on the unit sphere"


@dataclass
class ExperimentConfig:
    source: str = "synthetic"              # synthetic | csv
    n_grid: tuple = (10, 20, 40, 80, 160)
    d: int = 3
    seed_list: tuple = (0, 1, 2, 3, 4)
    csv_path: str | None = None
    label_column: str = "y"
    split_fraction: float = 0.8
    lam: float = 1e-8
    lam_tilde: float = 1e-10
    pattern_mode: str = "auto"             # auto | exact | sampled
    pattern_budget: int = 10_000
    truncate_b: float | None = None
    n_test: int = 20
    large_test: bool = False
    out_path: str | None = None
    max_iters: int = 4000
    solver_rho: float = 0.05
    abs_tol: float = 1e-7
    rel_tol: float = 1e-5
    feasibility_tol: float = 1e-6

    def __post_init__(self):
        self.n_grid = tuple(int(n) for n in self.n_grid)
        self.seed_list = tuple(int(s) for s in self.seed_list)
        if self.source not in ("synthetic", "csv"):
            raise DomainError(f"unknown source {self.source!r}")
        if len(self.n_grid) == 0 or not all(b > a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise DomainError("n_grid must be nonempty and strictly increasing")
        if len(self.seed_list) == 0:
            raise DomainError("seed_list must be nonempty")
        if not (0.0 < self.split_fraction < 1.0):
            raise DomainError("split_fraction must lie in (0, 1)")
        if self.source == "csv" and not self.csv_path:
            raise DomainError("csv source requires csv_path")


@dataclass
class SweepRecord:
    n: int
    seed: int
    method: str                 # pathnorm | ntk
    train_mse: float = np.nan
    test_mse: float = np.nan
    path_norm: float | None = None
    width: int | None = None
    iters: int | None = None
    duality_gap: float | None = None
    wall_ms: float = 0.0
    error: str = ""
    meta: dict = field(default_factory=dict)


def gen_synthetic(n: int, d: int, seed: int):
    """Noiseless single-ReLU data: unit-sphere inputs, y = relu(<w*, x>).

    w* is drawn once per seed before the inputs, so the first rows of a
    larger pool coincide with a smaller draw at the same seed.
    """
    if n < 1 or d < 1:
        raise DomainError("n and d must be >= 1")
    rng = np.random.default_rng(seed)
    w_star = rng.standard_normal(d)
    X = rng.standard_normal((n, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    y = np.maximum(X @ w_star, 0.0)
    return Dataset(X, y, normalized=True), TargetInfo(w_star=w_star)


def _synthetic_pool(n_pool: int, n_test: int, d: int, seed: int):
    """Training pool plus a held-out test set from one seeded stream."""
    rng = np.random.default_rng(seed)
    w_star = rng.standard_normal(d)
    Xp = rng.standard_normal((n_pool, d))
    Xp /= np.linalg.norm(Xp, axis=1, keepdims=True)
    Xt = rng.standard_normal((n_test, d))
    Xt /= np.linalg.norm(Xt, axis=1, keepdims=True)
    pool = Dataset(Xp, np.maximum(Xp @ w_star, 0.0), normalized=True)
    test = Dataset(Xt, np.maximum(Xt @ w_star, 0.0), normalized=True)
    return pool, test, TargetInfo(w_star=w_star)


def load_csv(path: str, label_column: str = "y", split_fraction: float = 0.8,
             seed: int = 0):
    """Shuffled train/test split of a numeric CSV with a header row.

    Train size is floor(split_fraction * n_total).  Features are z-scored
    with statistics fit on the training rows and applied to the test rows;
    the transform is recorded in both datasets' meta.
    """
    if not (0.0 < split_fraction < 1.0):
        raise DomainError("split_fraction must lie in (0, 1)")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise MissingLabel(f"{path}: no column named {label_column!r} in header")
        label_idx = header.index(label_column)
        rows = []
        for r, row in enumerate(reader, start=2):
            if not row:
                continue
            vals = []
            for c, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {r}, column {header[c] if c < len(header) else c}: "
                        f"cannot parse {cell!r}"
                    ) from None
            if len(vals) != len(header):
                raise ParseError(f"{path}: row {r}: expected {len(header)} cells, got {len(vals)}")
            rows.append(vals)
    if len(rows) < 2:
        raise ParseError(f"{path}: need at least 2 data rows, got {len(rows)}")
    arr = np.asarray(rows)
    y = arr[:, label_idx]
    X = np.delete(arr, label_idx, axis=1)
    feat_names = [h for i, h in enumerate(header) if i != label_idx]

    n_total = X.shape[0]
    n_train = int(np.floor(split_fraction * n_total))
    if n_train < 1 or n_train >= n_total:
        raise DomainError(f"split leaves an empty side (n_total={n_total}, n_train={n_train})")
    perm = np.random.default_rng(seed).permutation(n_total)
    tr, te = perm[:n_train], perm[n_train:]
    mu = X[tr].mean(axis=0)
    sd = X[tr].std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    meta = {"columns": feat_names, "label": label_column, "mean": mu.tolist(),
            "std": sd.tolist(), "split_fraction": split_fraction, "seed": seed,
            "standardized": True}
    train = Dataset((X[tr] - mu) / sd, y[tr], meta=dict(meta, role="train"))
    test = Dataset((X[te] - mu) / sd, y[te], meta=dict(meta, role="test"))
    return train, test


def fit_slope(ns, mses) -> float:
    """Least-squares slope of log(mse) against log(n)."""
    ns = np.asarray(ns, dtype=float)
    mses = np.asarray(mses, dtype=float)
    if ns.shape != mses.shape or ns.size < 3:
        raise DomainError("need at least 3 matched (n, mse) points")
    if np.any(mses <= 0) or np.any(ns <= 0):
        raise DomainError("slope fit requires positive n and mse")
    return float(np.polyfit(np.log(ns), np.log(mses), 1)[0])


def _pattern_mode_for(data: Dataset, config: ExperimentConfig) -> str:
    if config.pattern_mode != "auto":
        return config.pattern_mode
    r = data.rank()
    return "exact" if exact_region_count(data.n, r) <= config.pattern_budget else "sampled"


def _run_pathnorm_cell(train: Dataset, test: Dataset, seed: int,
                       config: ExperimentConfig) -> SweepRecord:
    rec = SweepRecord(n=train.n, seed=seed, method="pathnorm")
    t0 = time.perf_counter()
    mode = _pattern_mode_for(train, config)
    patterns = enumerate_patterns(train, mode, config.pattern_budget, seed)
    program = assemble(train, patterns, config.lam, config.lam_tilde)
    cfg = SolverConfig(max_iters=config.max_iters, abs_tol=config.abs_tol,
                       rel_tol=config.rel_tol, feasibility_tol=config.feasibility_tol,
                       rho=config.solver_rho, seed=seed)
    sol, diag = solve(program, cfg)
    net = reconstruct(sol, program)
    pred_tr = forward(net, train.X)
    pred_te = forward(net, test.X)
    pn = path_norm(net).path_norm
    convex_obj = objective(program, sol, include_l2=False)
    net_obj = mse(pred_tr, train.y) + config.lam * pn
    if config.truncate_b is not None:
        pred_tr = truncate(pred_tr, config.truncate_b)
        pred_te = truncate(pred_te, config.truncate_b)
    rec.train_mse = mse(pred_tr, train.y)
    rec.test_mse = mse(pred_te, test.y)
    rec.path_norm = pn
    rec.width = net.m
    rec.iters = diag.iterations
    rec.duality_gap = abs(convex_obj - net_obj)
    rec.wall_ms = 1000.0 * (time.perf_counter() - t0)
    rec.meta = {"pattern_mode": mode, "status": diag.status}
    return rec


def _run_ntk_cell(train: Dataset, test: Dataset, seed: int,
                  config: ExperimentConfig) -> SweepRecord:
    rec = SweepRecord(n=train.n, seed=seed, method="ntk")
    t0 = time.perf_counter()
    km = ntk_mod.gram(train.X)
    alpha = ntk_mod.krr_fit(km, train.y, config.lam)
    pred_tr = ntk_mod.krr_predict(alpha, train.X, train.X)
    pred_te = ntk_mod.krr_predict(alpha, train.X, test.X)
    if config.truncate_b is not None:
        pred_tr = truncate(pred_tr, config.truncate_b)
        pred_te = truncate(pred_te, config.truncate_b)
    rec.train_mse = mse(pred_tr, train.y)
    rec.test_mse = mse(pred_te, test.y)
    rec.wall_ms = 1000.0 * (time.perf_counter() - t0)
    rec.meta = {"kernel": ntk_mod.KERNEL_CONVENTION, "jitter": km.jitter}
    return rec


def rate_sweep(config: ExperimentConfig):
    """Run all (n, seed, method) cells; returns records in canonical order.

    Per-cell errors are captured in the record's ``error`` field instead of
    aborting the sweep; such rows have empty metric cells in the CSV and are
    listed in a ``<out>.failures.txt`` sidecar.
    """
    records = []
    n_max = max(config.n_grid)
    for seed in config.seed_list:
        if config.source == "synthetic":
            n_test = LARGE_TEST_SIZE if config.large_test else config.n_test
            pool, test, _ = _synthetic_pool(n_max, n_test, config.d, seed)
        else:
            pool, test = load_csv(config.csv_path, config.label_column,
                                  config.split_fraction, seed)
        for n in config.n_grid:
            if n > pool.n:
                for method in ("ntk", "pathnorm"):
                    records.append(SweepRecord(n=n, seed=seed, method=method,
                                               error=f"pool has only {pool.n} rows"))
                continue
            train = Dataset(pool.X[:n].copy(), pool.y[:n].copy(),
                            normalized=pool.normalized, meta=dict(pool.meta))
            for method, runner in (("ntk", _run_ntk_cell), ("pathnorm", _run_pathnorm_cell)):
                try:
                    records.append(runner(train, test, seed, config))
                except PathCvxError as exc:
                    records.append(SweepRecord(n=n, seed=seed, method=method,
                                               error=f"{type(exc).__name__}: {exc}"))
    records.sort(key=lambda r: (r.n, r.seed, r.method))
    if config.out_path:
        write_sweep_csv(records, config.out_path)
    return records


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if np.isnan(x):
            return ""
        return repr(x)
    return str(x)


def write_sweep_csv(records, out_path: str) -> None:
    """Fixed-order CSV plus a gnuplot stub; failures to a sidecar file."""
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            if r.error:
                w.writerow([r.n, r.seed, r.method, "", "", "", "", "", "", ""])
            else:
                w.writerow([r.n, r.seed, r.method, _fmt(r.train_mse), _fmt(r.test_mse),
                            _fmt(r.path_norm), _fmt(r.width), _fmt(r.iters),
                            _fmt(r.duality_gap), _fmt(r.wall_ms)])
    failures = [r for r in records if r.error]
    if failures:
        with open(out_path + ".failures.txt", "w") as fh:
            for r in failures:
                fh.write(f"n={r.n} seed={r.seed} method={r.method}: {r.error}\n")
    with open(out_path + ".gp", "w") as fh:
        fh.write(
            "# gnuplot stub: raw test MSE against training size\n"
            "set datafile separator ','\n"
            "set logscale xy\n"
            "set xlabel 'n (training points)'\n"
            "set ylabel 'test MSE'\n"
            f"plot '{out_path}' using 1:(strcol(3) eq 'pathnorm' ? column(5) : 1/0) "
            "title 'path norm' pt 7, \\\n"
            f"     '{out_path}' using 1:(strcol(3) eq 'ntk' ? column(5) : 1/0) "
            "title 'NTK' pt 5\n"
        )
