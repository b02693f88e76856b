"""Command-line interface.

Data CSVs carry a header row; feature columns are named freely and the
label column defaults to "y" (override with --label).  Subcommands that do
not need labels ignore the label column when present.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import complexity as cx
from . import ntk as ntk_mod
from .arrangement import enumerate_patterns, ActivationPattern, PatternSet
from .data import Dataset
from .errors import MissingLabel, ParseError, PathCvxError
from .harness import ExperimentConfig, fit_slope, gen_synthetic, load_csv, rate_sweep
from .network import TwoLayerNet, forward, mse, path_norm, reconstruct, truncate
from .solver import BlockSolution, SolverConfig, assemble, objective, solve


def _read_table(path: str):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        rows = []
        for r, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ParseError(f"{path}: row {r}: {exc}") from None
    return header, np.asarray(rows)


def _read_features_labels(path: str, label: str, need_label: bool):
    header, arr = _read_table(path)
    if label in header:
        idx = header.index(label)
        y = arr[:, idx]
        X = np.delete(arr, idx, axis=1)
        return X, y
    if need_label:
        raise MissingLabel(f"{path}: no column named {label!r}")
    return arr, None


def _pattern_set_to_json(ps: PatternSet) -> dict:
    return {
        "n": int(ps.patterns[0].mask.shape[0]) if len(ps) else 0,
        "rank": ps.rank_r,
        "mode": ps.enumeration_mode,
        "budget": ps.sample_budget,
        "seed": ps.seed,
        "masks": [p.mask_string() for p in ps.patterns],
        "witnesses": [p.witness.tolist() for p in ps.patterns],
        "degenerate": [bool(p.degenerate) for p in ps.patterns],
    }


def _pattern_set_from_json(doc: dict) -> PatternSet:
    pats = [
        ActivationPattern(
            mask=np.array([ch == "1" for ch in m], dtype=bool),
            witness=np.asarray(w, dtype=float),
            degenerate=bool(g),
        )
        for m, w, g in zip(doc["masks"], doc["witnesses"], doc["degenerate"])
    ]
    return PatternSet(pats, rank_r=int(doc["rank"]), enumeration_mode=doc["mode"],
                      sample_budget=int(doc["budget"]), seed=int(doc["seed"]))


def _cmd_patterns(args) -> int:
    X, y = _read_features_labels(args.data, args.label, need_label=False)
    data = Dataset(X, y if y is not None else np.zeros(X.shape[0]))
    ps = enumerate_patterns(data, args.mode, args.budget, args.seed)
    with open(args.out, "w") as fh:
        json.dump(_pattern_set_to_json(ps), fh, indent=1)
    print(f"{len(ps)} patterns ({ps.enumeration_mode}, rank {ps.rank_r}) -> {args.out}")
    return 0


def _cmd_fit(args) -> int:
    X, y = _read_features_labels(args.data, args.label, need_label=True)
    data = Dataset(X, y)
    if args.patterns == "auto":
        from .arrangement import exact_region_count
        mode = "exact" if exact_region_count(data.n, data.rank()) <= args.budget else "sampled"
        ps = enumerate_patterns(data, mode, args.budget, args.seed)
    else:
        with open(args.patterns) as fh:
            ps = _pattern_set_from_json(json.load(fh))
    program = assemble(data, ps, args.lam, args.lambda_tilde)
    cfg = SolverConfig(max_iters=args.max_iters, abs_tol=args.tol,
                       feasibility_tol=args.tol, rho=args.rho, seed=args.seed)
    sol, diag = solve(program, cfg)
    net = reconstruct(sol, program)
    doc = {
        "lambda": args.lam,
        "lambda_tilde": args.lambda_tilde,
        "pattern_mode": ps.enumeration_mode,
        "masks": [p.mask_string() for p in ps.patterns],
        "u": sol.u.tolist(),
        "diagnostics": {
            "iterations": diag.iterations,
            "primal_residual": diag.primal_residual,
            "dual_residual": diag.dual_residual,
            "objective": diag.objective,
            "feasibility_violation": diag.feasibility_violation,
            "status": diag.status,
            "rho_final": diag.rho_final,
        },
        "config": {
            "max_iters": cfg.max_iters, "abs_tol": cfg.abs_tol,
            "rel_tol": cfg.rel_tol, "feasibility_tol": cfg.feasibility_tol,
            "rho": cfg.rho, "seed": cfg.seed, "warm_start": cfg.warm_start,
        },
        "model": {"m": net.m, "a": net.a.tolist(), "W": net.W.tolist()},
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1)
    print(f"status={diag.status} iters={diag.iterations} objective={diag.objective:.6e} "
          f"width={net.m} train_mse={mse(forward(net, X), y):.6e} -> {args.out}")
    return 0 if diag.status == "converged" else 1


def _cmd_predict(args) -> int:
    with open(args.model) as fh:
        doc = json.load(fh)
    if "model" in doc:
        doc = doc["model"]
    net = TwoLayerNet(int(doc["m"]), np.asarray(doc["a"], dtype=float),
                      np.asarray(doc["W"], dtype=float).reshape(int(doc["m"]), -1))
    X, _ = _read_features_labels(args.data, args.label, need_label=False)
    pred = forward(net, X)
    if args.truncate is not None:
        pred = truncate(pred, args.truncate)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pred"])
        for v in pred:
            w.writerow([repr(float(v))])
    print(f"{pred.shape[0]} predictions -> {args.out}")
    return 0


def _cmd_ntk_fit(args) -> int:
    X, y = _read_features_labels(args.data, args.label, need_label=True)
    km = ntk_mod.gram(X)
    alpha = ntk_mod.krr_fit(km, y, args.lam)
    train_mse = mse(ntk_mod.krr_predict(alpha, X, X), y)
    Xt, yt = _read_features_labels(args.test, args.label, need_label=False)
    pred = ntk_mod.krr_predict(alpha, X, Xt)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pred"])
        for v in pred:
            w.writerow([repr(float(v))])
    msg = f"kernel={ntk_mod.KERNEL_CONVENTION} jitter={km.jitter:.3e} train_mse={train_mse:.6e}"
    if yt is not None:
        msg += f" test_mse={mse(pred, yt):.6e}"
    print(msg + f" -> {args.out}")
    return 0


def _cmd_complexity_gauss(args) -> int:
    X, y = _read_features_labels(args.data, args.label, need_label=False)
    data = Dataset(X, y if y is not None else np.zeros(X.shape[0]))
    upper, lower = cx.gaussian_complexity_mc(data, args.radius, args.trials, args.seed)
    bound = cx.gaussian_bound(args.radius, data.d, data.n)
    rows = [
        ["kind", "mean", "stderr", "trials", "seed", "closed_form_bound"],
        ["upper", repr(upper.mean), repr(upper.stderr), upper.trials, upper.seed, repr(bound)],
        ["coordinate-lower", repr(lower.mean), repr(lower.stderr), lower.trials,
         lower.seed, repr(bound)],
    ]
    _write_rows(args.out, rows)
    print(f"upper {upper.mean:.6f} (se {upper.stderr:.2g})  "
          f"lower {lower.mean:.6f} (se {lower.stderr:.2g})  bound {bound:.6f}")
    return 0


def _cmd_complexity_entropy(args) -> int:
    table, slope = cx.covering_exponent_probe(args.dim, args.eps, args.points,
                                              args.neurons, args.seed)
    rows = [["eps", "count", "fitted_slope"]]
    for e, c in table:
        rows.append([repr(e), c, repr(slope)])
    _write_rows(args.out, rows)
    print(f"slope {slope:.4f} (exponent 2d/(d+2) = {cx.entropy_exponent(args.dim):.4f})")
    return 0


def _write_rows(path, rows) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)


def _cmd_sweep(args) -> int:
    with open(args.config, "rb") as fh:
        raw = fh.read()
    if args.config.endswith(".toml"):
        try:
            import tomllib as toml
        except ImportError:
            import tomli as toml
        doc = toml.loads(raw.decode())
    else:
        doc = json.loads(raw.decode())
    config = ExperimentConfig(**doc)
    records = rate_sweep(config)
    ok = sum(1 for r in records if not r.error)
    print(f"{ok}/{len(records)} cells finished"
          + (f" -> {config.out_path}" if config.out_path else ""))
    return 0 if ok == len(records) else 1


def _cmd_gen(args) -> int:
    data, target = gen_synthetic(args.n, args.d, args.seed)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(args.d)] + ["y"])
        for row, label in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(label))])
    print(f"{args.n} rows (d={args.d}, {target.description}) -> {args.out}")
    return 0


def _cmd_slope(args) -> int:
    with open(args.infile, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [r for r in reader if r.get("test_mse")]
    out = []
    for method in ("pathnorm", "ntk"):
        per_n: dict[int, list[float]] = {}
        for r in rows:
            if r["method"] == method:
                per_n.setdefault(int(r["n"]), []).append(float(r["test_mse"]))
        if len(per_n) >= 3:
            ns = sorted(per_n)
            med = [float(np.median(per_n[n])) for n in ns]
            out.append((method, fit_slope(ns, med)))
    for method, slope in out:
        print(f"{method}: slope {slope:.4f}")
    if not out:
        print("not enough data for a slope fit (need 3 grid points)")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pathcvx", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("patterns", help="enumerate activation patterns")
    q.add_argument("--data", required=True)
    q.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    q.add_argument("--budget", type=int, default=100_000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--label", default="y")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_patterns)

    q = sub.add_parser("fit", help="solve the convex program and reconstruct the network")
    q.add_argument("--data", required=True)
    q.add_argument("--lambda", dest="lam", type=float, default=1e-8)
    q.add_argument("--lambda-tilde", dest="lambda_tilde", type=float, default=1e-10)
    q.add_argument("--patterns", default="auto", help="'auto' or a patterns JSON path")
    q.add_argument("--budget", type=int, default=10_000)
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--max-iters", type=int, default=20_000)
    q.add_argument("--rho", type=float, default=1.0)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--label", default="y")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_fit)

    q = sub.add_parser("predict", help="evaluate a reconstructed network")
    q.add_argument("--model", required=True)
    q.add_argument("--data", required=True)
    q.add_argument("--truncate", type=float, default=None)
    q.add_argument("--label", default="y")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_predict)

    q = sub.add_parser("ntk-fit", help="kernel ridge regression with the ReLU NTK")
    q.add_argument("--data", required=True)
    q.add_argument("--lambda", dest="lam", type=float, default=1e-8)
    q.add_argument("--test", required=True)
    q.add_argument("--label", default="y")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_ntk_fit)

    q = sub.add_parser("complexity", help="capacity diagnostics")
    csub = q.add_subparsers(dest="subcommand", required=True)
    g = csub.add_parser("gauss", help="Monte-Carlo Gaussian complexity surrogates")
    g.add_argument("--data", required=True)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--trials", type=int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--label", default="y")
    g.add_argument("--out", default=None)
    g.set_defaults(func=_cmd_complexity_gauss)
    e = csub.add_parser("entropy", help="greedy-packing covering exponent probe")
    e.add_argument("--dim", type=int, required=True)
    e.add_argument("--eps", type=float, nargs="+", required=True)
    e.add_argument("--points", type=int, default=200)
    e.add_argument("--neurons", type=int, default=5000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default=None)
    e.set_defaults(func=_cmd_complexity_entropy)

    q = sub.add_parser("sweep", help="rate sweep from a TOML or JSON config")
    q.add_argument("--config", required=True)
    q.set_defaults(func=_cmd_sweep)

    q = sub.add_parser("gen", help="generate synthetic single-ReLU data")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_gen)

    q = sub.add_parser("slope", help="fit log-log rate slopes from a sweep CSV")
    q.add_argument("--in", dest="infile", required=True)
    q.set_defaults(func=_cmd_slope)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PathCvxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
