"""Polynomial systems, polynomial Hamiltonians and the symplectic link between them.

A :class:`PolySystem` is the vector field ``dx/dt = sum_j A_j x^(j-1)`` with
``A_j`` of order ``j``.  A :class:`PolyHamiltonian` is ``H(x) = sum_j B_j x^j``
with supersymmetric ``B_j``.  States are ordered coordinates first, momenta
second, so that ``J = [[0, I], [-I, 0]]`` and Hamilton's equations read
``dx/dt = J grad H(x)``.  Under that convention ``A_j = j J B_j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NotHamiltonian,
    NotSupersymmetric,
    OddDimension,
    OrderCapExceeded,
)
from .tensor import (
    DEFAULT_TOL,
    CubicalTensor,
    Permutation,
    as_vector,
    contract,
    contract_batch,
    is_supersymmetric,
    mat_tensor,
    symmetrize,
    symmetrize_trailing,
    symmetry_defect,
    transpose,
)

#: Largest order accepted by the k!-cost literal definition check.
DEF_ORDER_CAP = 8


def symplectic_J(n: int) -> np.ndarray:
    """Canonical symplectic matrix ``[[0, I], [-I, 0]]`` of size ``n``."""
    if n < 2 or n % 2:
        raise OddDimension(f"symplectic structure needs an even dimension >= 2, got {n}")
    m = n // 2
    J = np.zeros((n, n))
    J[:m, m:] = np.eye(m)
    J[m:, :m] = -np.eye(m)
    J.flags.writeable = False
    return J


def default_names(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n + 1))


def _check_names(names, n):
    if names is None:
        return default_names(n)
    names = tuple(names)
    if len(names) != n or len(set(names)) != n:
        raise DimensionMismatch(f"need {n} distinct variable names, got {names}")
    return names


def _collect(dim: int, tensors: Mapping[int, CubicalTensor]) -> dict[int, CubicalTensor]:
    out = {}
    for j, T in sorted(tensors.items()):
        j = int(j)
        if j < 2:
            raise ValueError(f"tensor orders start at 2, got {j}")
        if T.order != j or T.dim != dim:
            raise DimensionMismatch(
                f"tensor for j={j} has order {T.order}, dim {T.dim}; expected {j}, {dim}"
            )
        out[j] = T
    return out


class PolySystem:
    """``dx/dt = A_k x^(k-1) + ... + A_2 x`` in canonical form.

    Every ``A_j`` is replaced by its trailing symmetrization on construction,
    which leaves the vector field unchanged and makes the tensor
    representation unique.
    """

    __slots__ = ("dim", "tensors", "degree", "names")

    def __init__(
        self,
        dim: int,
        tensors: Mapping[int, CubicalTensor],
        degree: int | None = None,
        names: Sequence[str] | None = None,
    ):
        self.dim = int(dim)
        collected = _collect(self.dim, tensors)
        self.tensors = {j: symmetrize_trailing(T) for j, T in collected.items()}
        self.degree = max([2, *self.tensors]) if degree is None else int(degree)
        if self.tensors and self.degree < max(self.tensors):
            raise ValueError("degree smaller than the largest tensor order")
        self.names = _check_names(names, self.dim)

    def tensor(self, j: int) -> CubicalTensor:
        """``A_j``; the zero tensor when absent."""
        if j in self.tensors:
            return self.tensors[j]
        return CubicalTensor.zeros(j, self.dim)

    def to_json(self) -> dict:
        return {
            "kind": "system",
            "dim": self.dim,
            "degree": self.degree,
            "vars": list(self.names),
            "tensors": {str(j): T.to_json() for j, T in self.tensors.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> PolySystem:
        tensors = {int(j): CubicalTensor.from_json(t) for j, t in obj.get("tensors", {}).items()}
        return cls(obj["dim"], tensors, degree=obj.get("degree"), names=obj.get("vars"))

    def __repr__(self) -> str:
        return f"PolySystem(dim={self.dim}, orders={sorted(self.tensors)})"


class PolyHamiltonian:
    """``H(x) = B_k x^k + ... + B_2 x^2`` with supersymmetric ``B_j``."""

    __slots__ = ("dim", "tensors", "degree", "names")

    def __init__(
        self,
        dim: int,
        tensors: Mapping[int, CubicalTensor],
        degree: int | None = None,
        names: Sequence[str] | None = None,
    ):
        self.dim = int(dim)
        if self.dim < 2 or self.dim % 2:
            raise OddDimension(f"a Hamiltonian needs an even state dimension, got {self.dim}")
        self.tensors = _collect(self.dim, tensors)
        for j, B in self.tensors.items():
            if not is_supersymmetric(B, 1e-12):
                raise NotSupersymmetric(f"B_{j} is not supersymmetric")
        self.degree = max([2, *self.tensors]) if degree is None else int(degree)
        self.names = _check_names(names, self.dim)

    @classmethod
    def from_forms(cls, dim, tensors, **kwargs) -> PolyHamiltonian:
        """Build from arbitrary coefficient tensors by symmetrizing each one."""
        return cls(dim, {j: symmetrize(T) for j, T in tensors.items()}, **kwargs)

    def tensor(self, j: int) -> CubicalTensor:
        if j in self.tensors:
            return self.tensors[j]
        return CubicalTensor.zeros(j, self.dim)

    def to_json(self) -> dict:
        return {
            "kind": "hamiltonian",
            "dim": self.dim,
            "degree": self.degree,
            "vars": list(self.names),
            "tensors": {str(j): T.to_json() for j, T in self.tensors.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> PolyHamiltonian:
        tensors = {int(j): CubicalTensor.from_json(t) for j, t in obj.get("tensors", {}).items()}
        return cls(obj["dim"], tensors, degree=obj.get("degree"), names=obj.get("vars"))

    def __repr__(self) -> str:
        return f"PolyHamiltonian(dim={self.dim}, orders={sorted(self.tensors)})"


def is_hamiltonian_tensor(A: CubicalTensor, tol: float = DEFAULT_TOL) -> bool:
    """``A`` is a Hamiltonian cubical tensor iff ``J A`` is supersymmetric."""
    return is_supersymmetric(mat_tensor(symplectic_J(A.dim), A), tol)


def is_hamiltonian_tensor_def(
    A: CubicalTensor, tol: float = DEFAULT_TOL, order_cap: int = DEF_ORDER_CAP
) -> bool:
    """Literal check of ``(J^T A)^sigma + J A = 0`` over every ``sigma`` in S_k.

    Costs ``k!`` transposes; kept as an independent cross-check of
    :func:`is_hamiltonian_tensor`.
    """
    J = symplectic_J(A.dim)
    if A.order > order_cap:
        raise OrderCapExceeded(f"order {A.order} exceeds the cap {order_cap}")
    JtA = mat_tensor(J.T, A)
    JA = mat_tensor(J, A).data
    bound = tol * max(1.0, A.max_abs())
    for images in itertools.permutations(range(1, A.order + 1)):
        lhs = transpose(JtA, Permutation(images)).data + JA
        if np.max(np.abs(lhs)) > bound:
            return False
    return True


def decompose(A: CubicalTensor, tol: float = DEFAULT_TOL) -> CubicalTensor:
    """Return the supersymmetric ``R = J^T A`` with ``A = J R``."""
    if not is_hamiltonian_tensor(A, tol):
        raise NotHamiltonian("tensor is not a Hamiltonian cubical tensor")
    return mat_tensor(symplectic_J(A.dim).T, A)


@dataclass(frozen=True)
class HamiltonianWitness:
    """Why a system failed the Hamiltonian test.

    ``order`` is the smallest ``j`` whose ``J A_j`` is not supersymmetric,
    ``index`` the 1-based entry of ``J A_j`` deviating most from its sorted
    counterpart, ``defect`` that deviation.
    """

    order: int
    index: tuple[int, ...]
    defect: float

    def to_json(self) -> dict:
        return {"order": self.order, "index": list(self.index), "defect": self.defect}


def system_is_hamiltonian(
    sys: PolySystem, tol: float = DEFAULT_TOL
) -> tuple[bool, HamiltonianWitness | None]:
    J = symplectic_J(sys.dim)
    for j, A in sorted(sys.tensors.items()):
        JA = mat_tensor(J, A)
        if not is_supersymmetric(JA, tol):
            defect, idx = symmetry_defect(JA)
            return False, HamiltonianWitness(j, idx, defect)
    return True, None


def extract_hamiltonian(sys: PolySystem, tol: float = DEFAULT_TOL) -> PolyHamiltonian:
    """Hamiltonian of a Hamiltonian system: ``B_j = (1/j) J^T A_j``.

    ``J^T A_j`` is projected onto the supersymmetric tensors, which is exact
    for inputs that pass the test and absorbs round-off otherwise.
    """
    ok, witness = system_is_hamiltonian(sys, tol)
    if not ok:
        raise NotHamiltonian(
            f"A_{witness.order} is not a Hamiltonian tensor (J A_{witness.order} "
            f"asymmetric at {witness.index} by {witness.defect:.3g})",
            witness,
        )
    Jt = symplectic_J(sys.dim).T
    tensors = {j: symmetrize(mat_tensor(Jt, A)) / j for j, A in sys.tensors.items()}
    return PolyHamiltonian(sys.dim, tensors, degree=sys.degree, names=sys.names)


def build_system(H: PolyHamiltonian) -> PolySystem:
    """Hamilton's equations ``dx/dt = J grad H = sum_j j J B_j x^(j-1)``."""
    J = symplectic_J(H.dim)
    tensors = {j: mat_tensor(J, B) * j for j, B in H.tensors.items()}
    return PolySystem(H.dim, tensors, degree=H.degree, names=H.names)


def eval_H(H: PolyHamiltonian, x) -> float:
    x = as_vector(x, H.dim)
    return float(sum(contract(B.data, x, j) for j, B in H.tensors.items()))


def eval_H_batch(H: PolyHamiltonian, X) -> np.ndarray:
    """``H`` at every row of ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != H.dim:
        raise DimensionMismatch(f"expected rows of length {H.dim}, got shape {X.shape}")
    out = np.zeros(len(X))
    for j, B in H.tensors.items():
        out += (contract_batch(B.data, X, j - 1) * X).sum(axis=1)
    return out


def grad_H(H: PolyHamiltonian, x) -> np.ndarray:
    x = as_vector(x, H.dim)
    g = np.zeros(H.dim)
    for j, B in H.tensors.items():
        g += j * contract(B.data, x, j - 1)
    return g


def hessian_H(H: PolyHamiltonian, x) -> np.ndarray:
    """``sum_j j (j-1) B_j x^(j-2)``, symmetric because each ``B_j`` is."""
    x = as_vector(x, H.dim)
    M = np.zeros((H.dim, H.dim))
    for j, B in H.tensors.items():
        M += (j * (j - 1)) * contract(B.data, x, j - 2)
    return M


def eval_rhs(sys: PolySystem, x) -> np.ndarray:
    x = as_vector(x, sys.dim)
    f = np.zeros(sys.dim)
    for j, A in sys.tensors.items():
        f += contract(A.data, x, j - 1)
    return f


def rhs_jacobian(sys: PolySystem, x) -> np.ndarray:
    """Jacobian of :func:`eval_rhs`.

    Row ``i`` is the gradient of the form ``A_j[i] x^(j-1)``.  Canonical
    slices are supersymmetric, so that gradient is ``(j-1) A_j[i] x^(j-2)``.
    """
    x = as_vector(x, sys.dim)
    D = np.zeros((sys.dim, sys.dim))
    for j, A in sys.tensors.items():
        D += (j - 1) * contract(A.data, x, j - 2)
    return D
