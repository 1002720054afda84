"""Timing harness: contraction Hessian versus finite-difference Hessian."""

from __future__ import annotations

import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import OddDimension
from .hamiltonian import PolyHamiltonian, eval_H, hessian_H
from .systems import random_hamiltonian
from .tensor import check_cap, as_vector

DEFAULT_SEED = 42


def fd_hessian(H: PolyHamiltonian, x, h: float = 1e-4) -> np.ndarray:
    """Central second differences of ``eval_H``; each pair ``i <= j`` is computed once."""
    x = as_vector(x, H.dim)
    n = H.dim
    M = np.empty((n, n))
    f0 = eval_H(H, x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        M[i, i] = (eval_H(H, x + ei) - 2.0 * f0 + eval_H(H, x - ei)) / (h * h)
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            M[i, j] = M[j, i] = (
                eval_H(H, x + ei + ej)
                - eval_H(H, x + ei - ej)
                - eval_H(H, x - ei + ej)
                + eval_H(H, x - ei - ej)
            ) / (4.0 * h * h)
    return M


@dataclass
class BenchResult:
    dim: int
    order: int
    trials: int
    seed: int
    tensor_median_s: float
    fd_median_s: float
    speedup: float
    max_rel_diff: float

    def to_json(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        return "\n".join(
            [
                f"dim={self.dim} order={self.order} trials={self.trials} seed={self.seed}",
                f"{'method':<22}{'median [s]':>14}",
                f"{'tensor contraction':<22}{self.tensor_median_s:>14.3e}",
                f"{'finite differences':<22}{self.fd_median_s:>14.3e}",
                f"speedup {self.speedup:.1f}x, max relative difference {self.max_rel_diff:.2e}",
            ]
        )


def compare_hessians(H: PolyHamiltonian, x, trials: int, seed: int = DEFAULT_SEED) -> BenchResult:
    """Time both Hessian routes at ``x``; reports medians over ``trials``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    x = as_vector(x, H.dim)
    t_tensor, t_fd = [], []
    for _ in range(trials):
        t0 = time.perf_counter()
        M = hessian_H(H, x)
        t1 = time.perf_counter()
        F = fd_hessian(H, x)
        t2 = time.perf_counter()
        t_tensor.append(t1 - t0)
        t_fd.append(t2 - t1)
    rel = float(np.max(np.abs(M - F)) / max(np.max(np.abs(M)), np.finfo(float).tiny))
    med_t, med_f = statistics.median(t_tensor), statistics.median(t_fd)
    return BenchResult(
        dim=H.dim,
        order=H.degree,
        trials=trials,
        seed=seed,
        tensor_median_s=med_t,
        fd_median_s=med_f,
        speedup=med_f / med_t if med_t > 0 else float("inf"),
        max_rel_diff=rel,
    )


def run_bench(dim: int, order: int, trials: int, seed: int = DEFAULT_SEED) -> BenchResult:
    """Random Hamiltonian of the given size, evaluated at a random point in [-1, 1]^n."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if dim % 2:
        raise OddDimension(f"bench needs an even dimension, got {dim}")
    check_cap(order, dim)
    rng = np.random.default_rng(seed)
    H = random_hamiltonian(dim, order, rng)
    x = rng.uniform(-1.0, 1.0, dim)
    return compare_hessians(H, x, trials, seed)
