import numpy as np
import pytest

from pathcvx import BlockSolution, Dataset, assemble, enumerate_patterns


def make_program(n, d, lam, lam_tilde, seed, budget=100_000):
    """Random dataset with exact patterns, assembled at the given weights."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    y = rng.standard_normal(n)
    data = Dataset(X, y)
    ps = enumerate_patterns(data, "exact", budget, seed)
    return assemble(data, ps, lam, lam_tilde), data, ps


def feasible_solution(program, seed, density=0.4):
    """Random cone-feasible solution: witness rays plus accepted tilts.

    Each pattern witness has strict margins, so any nonnegative multiple is
    feasible; random tilts are kept only when the cone check still passes.
    """
    rng = np.random.default_rng(seed)
    p = program.p
    u = np.zeros((2 * p, program.d))
    X = program.X
    for i in range(2 * p):
        if rng.random() > density:
            continue
        w = program.witnesses[i % p]
        t = abs(rng.standard_normal()) + 0.1
        cand = t * w
        sg = np.where(program.block_mask(i), 1.0, -1.0)
        for _ in range(3):
            pert = cand + 0.1 * t * rng.standard_normal(program.d)
            if np.all(sg * (X @ pert) >= 0.0):
                cand = pert
                break
        u[i] = cand
    return BlockSolution(u)
