"""Dense cubical tensors and the multilinear primitives built on them.

Indexing convention
-------------------
Externally (JSON files, :func:`make_tensor`, :meth:`CubicalTensor.entry`,
witnesses in reports) indices are 1-based, ``(i_1, ..., i_k)`` with each
``i_p`` in ``1..n``.  Internally an order-``k`` tensor is stored as a
C-ordered numpy array of shape ``(n,) * k``, so the flat offset of an
external index tuple is ``sum((i_p - 1) * n**(k - p) for p in 1..k)``.  The
map is a bijection between index tuples and ``range(n**k)``.

Transpose convention
--------------------
For a permutation ``sigma`` of ``{1..k}`` the transpose ``Y = X^sigma`` is
defined entrywise by ``Y(i_sigma(1), ..., i_sigma(k)) = X(i_1, ..., i_k)``.
Axis ``p`` of ``Y`` is therefore axis ``sigma(p)`` of ``X``.  With
``compose(a, b)(i) = a(b(i))`` transposes chain as::

    transpose(transpose(X, sigma), tau) == transpose(X, compose(sigma, tau))
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateEntry,
    IndexOutOfRange,
    MemoryCapExceeded,
    NonFiniteValue,
    NotSupersymmetric,
    OrderTooSmall,
    SizeMismatch,
)

#: Largest number of dense entries a tensor may hold.
MAX_ENTRIES = 10**8

#: Default relative tolerance for structural tests.
DEFAULT_TOL = 1e-9


def check_cap(order: int, dim: int) -> None:
    if dim**order > MAX_ENTRIES:
        raise MemoryCapExceeded(
            f"dense tensor of order {order} and dim {dim} needs {dim**order} "
            f"entries (cap {MAX_ENTRIES})"
        )


class Permutation:
    """A bijection of ``{1..k}`` stored as its 1-based image list."""

    __slots__ = ("images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"{images} is not a permutation of 1..{len(images)}")
        self.images = images

    @classmethod
    def identity(cls, k: int) -> Permutation:
        return cls(range(1, k + 1))

    @classmethod
    def transposition(cls, i: int, j: int, k: int) -> Permutation:
        """The permutation of ``{1..k}`` swapping ``i`` and ``j``."""
        images = list(range(1, k + 1))
        images[i - 1], images[j - 1] = images[j - 1], images[i - 1]
        return cls(images)

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def compose(self, other: Permutation) -> Permutation:
        """Return ``self o other``, i.e. ``i -> self(other(i))``."""
        if other.size != self.size:
            raise SizeMismatch("cannot compose permutations of different sizes")
        return Permutation(self(other(i)) for i in range(1, self.size + 1))

    def inverse(self) -> Permutation:
        inv = [0] * self.size
        for i, w in enumerate(self.images, start=1):
            inv[w - 1] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return self.images == tuple(range(1, self.size + 1))

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"


def compose(a: Permutation, b: Permutation) -> Permutation:
    """``compose(a, b)(i) == a(b(i))``."""
    return a.compose(b)


class CubicalTensor:
    """Immutable dense real tensor with ``order`` equal modes of size ``dim``.

    ``data`` is a read-only float64 array of shape ``(dim,) * order`` using
    0-based numpy indexing; use :meth:`entry` for 1-based access.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.array(data, dtype=float)
        if arr.ndim < 1:
            raise ValueError("a cubical tensor needs order >= 1")
        if len(set(arr.shape)) != 1 or arr.shape[0] < 1:
            raise DimensionMismatch(f"shape {arr.shape} is not cubical")
        check_cap(arr.ndim, arr.shape[0])
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValue("tensor entries must be finite")
        arr.flags.writeable = False
        self.data = arr

    @classmethod
    def zeros(cls, order: int, dim: int) -> CubicalTensor:
        check_cap(order, dim)
        return cls(np.zeros((dim,) * order))

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def entry(self, *idx: int) -> float:
        """Entry at a 1-based index tuple."""
        if len(idx) != self.order or not all(1 <= i <= self.dim for i in idx):
            raise IndexOutOfRange(f"index {idx} outside [1..{self.dim}]^{self.order}")
        return float(self.data[tuple(i - 1 for i in idx)])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data)))

    def is_zero(self) -> bool:
        return not np.any(self.data)

    def nonzero_entries(self) -> list[tuple[tuple[int, ...], float]]:
        """Sparse ``(1-based index, value)`` list in offset order."""
        nz = np.argwhere(self.data != 0)
        return [(tuple(int(i) + 1 for i in row), float(self.data[tuple(row)])) for row in nz]

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "dim": self.dim,
            "entries": [{"idx": list(idx), "val": val} for idx, val in self.nonzero_entries()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> CubicalTensor:
        entries = [(tuple(e["idx"]), e["val"]) for e in obj.get("entries", [])]
        return make_tensor(int(obj["order"]), int(obj["dim"]), entries)

    def allclose(self, other: CubicalTensor, tol: float = 1e-12) -> bool:
        """Entrywise ``|a - b| <= tol * max(1, max|a|, max|b|)``."""
        if self.data.shape != other.data.shape:
            return False
        scale = max(1.0, self.max_abs(), other.max_abs())
        return bool(np.max(np.abs(self.data - other.data)) <= tol * scale)

    def __add__(self, other: CubicalTensor) -> CubicalTensor:
        return CubicalTensor(self.data + other.data)

    def __sub__(self, other: CubicalTensor) -> CubicalTensor:
        return CubicalTensor(self.data - other.data)

    def __neg__(self) -> CubicalTensor:
        return CubicalTensor(-self.data)

    def __mul__(self, scalar: float) -> CubicalTensor:
        return CubicalTensor(self.data * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> CubicalTensor:
        return CubicalTensor(self.data / float(scalar))

    def __eq__(self, other) -> bool:
        return isinstance(other, CubicalTensor) and np.array_equal(self.data, other.data)

    __hash__ = None

    def __repr__(self) -> str:
        return f"CubicalTensor(order={self.order}, dim={self.dim}, nnz={np.count_nonzero(self.data)})"


def make_tensor(
    order: int, dim: int, sparse_entries: Iterable[tuple[Sequence[int], float]] = ()
) -> CubicalTensor:
    """Build a dense tensor from a sparse list of ``(1-based index, value)``.

    Unlisted positions are zero.  Repeating an index is an error rather than
    an accumulation.
    """
    if order < 1 or dim < 1:
        raise ValueError("order and dim must be positive")
    check_cap(order, dim)
    arr = np.zeros((dim,) * order)
    seen = set()
    for idx, val in sparse_entries:
        idx = tuple(int(i) for i in idx)
        if len(idx) != order or not all(1 <= i <= dim for i in idx):
            raise IndexOutOfRange(f"index {idx} outside [1..{dim}]^{order}")
        if idx in seen:
            raise DuplicateEntry(f"index {idx} listed twice")
        seen.add(idx)
        val = float(val)
        if not math.isfinite(val):
            raise NonFiniteValue(f"entry {idx} is {val}")
        arr[tuple(i - 1 for i in idx)] = val
    return CubicalTensor(arr)


def as_vector(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise DimensionMismatch(f"expected a vector of length {dim}, got shape {x.shape}")
    return x


def contract(arr: np.ndarray, x: np.ndarray, m: int):
    """Contract the last ``m`` axes of ``arr`` with ``x`` (no validation)."""
    for _ in range(m):
        arr = arr @ x
    return arr


def contract_batch(arr: np.ndarray, X: np.ndarray, m: int) -> np.ndarray:
    """``arr x^m`` for every row ``x`` of ``X`` (``m >= 1``); batch axis first."""
    T = np.tensordot(X, arr, axes=([1], [arr.ndim - 1]))
    for _ in range(m - 1):
        T = np.einsum("r...i,ri->r...", T, X)
    return T


def tvp(A: CubicalTensor, x, m: int):
    """Tensor-vector product ``A x^m``: contract the last ``m`` indices with ``x``.

    Returns a :class:`CubicalTensor` of order ``k - m``, or a float when
    ``m == k``.
    """
    x = as_vector(x, A.dim)
    if not 1 <= m <= A.order:
        raise ValueError(f"power m={m} must lie in 1..{A.order}")
    out = contract(A.data, x, m)
    if m == A.order:
        return float(out)
    return CubicalTensor(out)


def mat_tensor(R, A: CubicalTensor) -> CubicalTensor:
    """Matrix-tensor product: ``(RA)_{i1..ik} = sum_j R_{i1 j} A_{j i2..ik}``."""
    R = np.asarray(R, dtype=float)
    if R.shape != (A.dim, A.dim):
        raise DimensionMismatch(f"matrix {R.shape} does not act on dim {A.dim}")
    return CubicalTensor(np.tensordot(R, A.data, axes=([1], [0])))


def transpose(A: CubicalTensor, sigma: Permutation) -> CubicalTensor:
    """Tensor transpose with ``Y(i_sigma(1), ..., i_sigma(k)) = A(i_1, ..., i_k)``.

    The identity permutation is accepted and returns an equal tensor.
    """
    if sigma.size != A.order:
        raise SizeMismatch(f"permutation of size {sigma.size} on an order-{A.order} tensor")
    return CubicalTensor(A.data.transpose([w - 1 for w in sigma.images]))


@lru_cache(maxsize=32)
def _orbit_map(order: int, dim: int) -> np.ndarray:
    """Flat offset of the sorted index tuple, for every flat offset.

    Two offsets share an image exactly when one index tuple is a permutation
    of the other, so the image labels the S_k orbit of each entry.
    """
    idx = np.indices((dim,) * order).reshape(order, -1)
    idx.sort(axis=0)
    out = np.ravel_multi_index(tuple(idx), (dim,) * order)
    out.flags.writeable = False
    return out


def _orbit_average(flat: np.ndarray, order: int, dim: int) -> np.ndarray:
    orbit = _orbit_map(order, dim)
    sums = np.bincount(orbit, weights=flat, minlength=flat.size)
    counts = np.bincount(orbit, minlength=flat.size)
    return sums[orbit] / counts[orbit]


def symmetrize(A: CubicalTensor) -> CubicalTensor:
    """Average of ``A`` over all ``k!`` transposes.

    Each entry is replaced by the mean of its orbit under index permutation,
    which equals the ``1/k!`` sum because every orbit member is hit equally
    often.  The homogeneous form ``A x^k`` is preserved.
    """
    k, n = A.order, A.dim
    return CubicalTensor(_orbit_average(A.data.ravel(), k, n).reshape(A.data.shape))


def symmetrize_trailing(A: CubicalTensor) -> CubicalTensor:
    """Symmetrize every slice ``A[i, ...]`` over its last ``k - 1`` indices."""
    k, n = A.order, A.dim
    if k < 2:
        raise OrderTooSmall("trailing symmetrization needs order >= 2")
    if k == 2:
        return A
    orbit = _orbit_map(k - 1, n)
    size = n ** (k - 1)
    labels = (np.arange(n)[:, None] * size + orbit[None, :]).ravel()
    flat = A.data.ravel()
    sums = np.bincount(labels, weights=flat, minlength=flat.size)
    counts = np.bincount(labels, minlength=flat.size)
    return CubicalTensor((sums[labels] / counts[labels]).reshape(A.data.shape))


def symmetry_defect(A: CubicalTensor) -> tuple[float, tuple[int, ...]]:
    """Largest ``|A(i) - A(sort(i))|`` and the 1-based index where it occurs.

    ``A`` equals every transpose iff each entry equals the entry at its sorted
    index tuple, since the sorted tuple is reachable from ``i`` by some
    permutation and every permutation of ``i`` shares that sorted tuple.
    """
    flat = A.data.ravel()
    diff = np.abs(flat - flat[_orbit_map(A.order, A.dim)])
    pos = int(np.argmax(diff))
    idx = tuple(int(i) + 1 for i in np.unravel_index(pos, A.data.shape))
    return float(diff[pos]), idx


def is_supersymmetric(A: CubicalTensor, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``A`` is invariant under every index permutation, to ``tol``.

    ``tol`` is relative to ``max(1, max|A|)``.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if A.order == 1:
        return True
    defect, _ = symmetry_defect(A)
    return defect <= tol * max(1.0, A.max_abs())


def trace(A: CubicalTensor) -> float:
    """Sum of the diagonal entries ``A_{ii...i}``."""
    i = np.arange(A.dim)
    return float(A.data[(i,) * A.order].sum())


def grad_form(B: CubicalTensor, x, check: bool = False) -> np.ndarray:
    """Gradient of ``x -> B x^k`` for supersymmetric ``B``: ``k B x^(k-1)``.

    With ``check=True`` the supersymmetry precondition is verified first.
    """
    if check and not is_supersymmetric(B):
        raise NotSupersymmetric("grad_form requires a supersymmetric tensor")
    x = as_vector(x, B.dim)
    return B.order * np.asarray(contract(B.data, x, B.order - 1), dtype=float).reshape(B.dim)


def grad_general(A: CubicalTensor, x) -> np.ndarray:
    """Gradient of ``x -> A x^k`` for an arbitrary tensor.

    Sums ``A x^(k-1)`` and ``A^{sigma_1j} x^(k-1)`` for ``j = 2..k``, where
    ``sigma_1j`` swaps positions 1 and ``j``.
    """
    x = as_vector(x, A.dim)
    k = A.order
    if k == 1:
        return A.data.copy()
    g = contract(A.data, x, k - 1)
    for j in range(2, k + 1):
        g = g + contract(transpose(A, Permutation.transposition(1, j, k)).data, x, k - 1)
    return np.asarray(g, dtype=float)
