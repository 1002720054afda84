"""Ready-made systems and Hamiltonians used in tests, docs and the CLI.

States follow the coordinates-then-momenta ordering expected by ``J``.
"""

from __future__ import annotations

import numpy as np

from .hamiltonian import PolyHamiltonian, PolySystem
from .tensor import CubicalTensor, make_tensor, symmetrize


def quadratic_cubic_example() -> PolySystem:
    """``x1' = x1^2 + 2 x2``, ``x2' = -2 x1 x2``; Hamiltonian ``x1^2 x2 + x2^2``."""
    A2 = make_tensor(2, 2, [((1, 2), 2.0)])
    A3 = make_tensor(3, 2, [((1, 1, 1), 1.0), ((2, 1, 2), -1.0), ((2, 2, 1), -1.0)])
    return PolySystem(2, {2: A2, 3: A3})


def harmonic_oscillator() -> PolySystem:
    """``x' = p``, ``p' = -x``."""
    return PolySystem(2, {2: make_tensor(2, 2, [((1, 2), 1.0), ((2, 1), -1.0)])}, names=("x", "p"))


def anharmonic_oscillator(m: float = 1.0, k: float = 1.0, b: float = 1.0) -> PolySystem:
    """``x' = p/m``, ``p' = -k x - b x^3`` with state ``(x, p)``."""
    A2 = make_tensor(2, 2, [((1, 2), 1.0 / m), ((2, 1), -k)])
    A4 = make_tensor(4, 2, [((2, 1, 1, 1), -b)])
    return PolySystem(2, {2: A2, 4: A4}, names=("x", "p"))


def saddle_center_example() -> PolySystem:
    """``x' = 4y - y^3``, ``y' = x``; equilibria at (0, 0) and (0, +-2)."""
    A2 = make_tensor(2, 2, [((1, 2), 4.0), ((2, 1), 1.0)])
    A4 = make_tensor(4, 2, [((1, 2, 2, 2), -1.0)])
    return PolySystem(2, {2: A2, 4: A4}, names=("x", "y"))


def saddle_center_hamiltonian() -> PolyHamiltonian:
    """``H = 2 y^2 - y^4 / 4 - x^2 / 2``, the Hamiltonian of :func:`saddle_center_example`."""
    B2 = make_tensor(2, 2, [((1, 1), -0.5), ((2, 2), 2.0)])
    B4 = make_tensor(4, 2, [((2, 2, 2, 2), -0.25)])
    return PolyHamiltonian(2, {2: B2, 4: B4}, names=("x", "y"))


def lotka_volterra(r=(1.0, -1.0), a=((0.0, -1.0), (1.0, 0.0))) -> PolySystem:
    """``x_i' = x_i (r_i + sum_j a_ij x_j)``."""
    r = np.asarray(r, dtype=float)
    a = np.asarray(a, dtype=float)
    n = len(r)
    A2 = np.diag(r)
    A3 = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            A3[i, i, j] += a[i, j]
    return PolySystem(n, {2: CubicalTensor(A2), 3: CubicalTensor(A3)})


def fput_chain(n: int, k: float = 0.5, alpha: float = 0.25, m: float = 1.0) -> PolySystem:
    """Fermi-Pasta-Ulam-Tsingou chain of ``n`` particles with fixed ends.

    ``m x_j'' = k (x_{j+1} + x_{j-1} - 2 x_j) (1 + alpha (x_{j+1} - x_{j-1}))``
    with ``x_0 = x_{n+1} = 0``, written first order with ``p_j = m x_j'``.
    State is ``(x_1..x_n, p_1..p_n)``.
    """
    N = 2 * n
    A2 = np.zeros((N, N))
    A3 = np.zeros((N, N, N))
    for j in range(n):
        A2[j, n + j] = 1.0 / m
        lap = np.zeros(n)  # x_{j+1} + x_{j-1} - 2 x_j
        dif = np.zeros(n)  # x_{j+1} - x_{j-1}
        lap[j] = -2.0
        if j + 1 < n:
            lap[j + 1] += 1.0
            dif[j + 1] += 1.0
        if j - 1 >= 0:
            lap[j - 1] += 1.0
            dif[j - 1] -= 1.0
        A2[n + j, :n] = k * lap
        A3[n + j, :n, :n] = k * alpha * np.outer(lap, dif)
    names = [f"x{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
    return PolySystem(N, {2: CubicalTensor(A2), 3: CubicalTensor(A3)}, names=names)


def random_hamiltonian(
    dim: int, degree: int, rng: np.random.Generator, orders=None
) -> PolyHamiltonian:
    """Random ``H`` with ``B_j`` drawn i.i.d. uniform on [-1, 1], then symmetrized."""
    orders = range(2, degree + 1) if orders is None else orders
    tensors = {j: symmetrize(CubicalTensor(rng.uniform(-1.0, 1.0, (dim,) * j))) for j in orders}
    return PolyHamiltonian(dim, tensors, degree=degree)
