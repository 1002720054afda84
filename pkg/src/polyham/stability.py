"""Equilibria of polynomial systems and their stability.

Stability is certified by the Dirichlet criterion: an equilibrium at which
the Hessian of ``H`` is definite is a strict local extremum of ``H`` and
hence Lyapunov stable.  When the Hessian is not definite the linearization
``J * Hessian`` is examined; an eigenvalue with positive real part proves
instability, anything else is reported as inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    NoConvergence,
    NotAnEquilibrium,
    NotSupersymmetric,
    NotSymmetric,
    OddOrder,
    SingularJacobian,
)
from .hamiltonian import (
    PolyHamiltonian,
    PolySystem,
    eval_H_batch,
    eval_rhs,
    grad_H,
    hessian_H,
    rhs_jacobian,
    symplectic_J,
)
from .tensor import DEFAULT_TOL, CubicalTensor, as_vector, contract_batch, is_supersymmetric

DEFAULT_RESTARTS = 64


class Classification(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    INCONCLUSIVE = "Inconclusive"


class Definiteness(str, Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    INDEFINITE = "Indefinite"
    SEMIDEFINITE = "Semidefinite"


class Rationale(str, Enum):
    #: Hessian definite, so the point is a strict extremum of H (Dirichlet).
    HESSIAN_DEFINITE = "hessian_definite"
    #: Linearization has an eigenvalue with positive real part.
    LINEAR_INSTABILITY = "linearization_unstable"
    #: Neither test fired.
    NO_CRITERION = "no_criterion"


def _vec_json(v):
    return None if v is None else [float(a) for a in v]


@dataclass(frozen=True)
class DefinitenessVerdict:
    """Sign classification of a quadratic or homogeneous form.

    ``min_value``/``max_value`` are the extremes of the form over the unit
    sphere (for :func:`hamiltonian_definiteness` fallbacks, over the sampled
    points).  ``heuristic`` marks verdicts obtained by numerical search, which
    can in principle miss a region of the other sign.
    """

    kind: Definiteness
    min_value: float
    max_value: float
    minimizer: np.ndarray | None = None
    maximizer: np.ndarray | None = None
    heuristic: bool = False
    certified: bool = True
    odd_orders: tuple[int, ...] = ()
    note: str = ""
    threshold: float = 0.0

    @property
    def definite(self) -> bool:
        return self.kind in (Definiteness.POSITIVE_DEFINITE, Definiteness.NEGATIVE_DEFINITE)

    @property
    def nonnegative(self) -> bool:
        """Positive definite or positive semidefinite."""
        return self.kind != Definiteness.INDEFINITE and self.min_value >= -self.threshold

    @property
    def nonpositive(self) -> bool:
        return self.kind != Definiteness.INDEFINITE and self.max_value <= self.threshold

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "minimizer": _vec_json(self.minimizer),
            "maximizer": _vec_json(self.maximizer),
            "heuristic": self.heuristic,
            "certified": self.certified,
            "odd_orders": list(self.odd_orders),
            "note": self.note,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class StabilityVerdict:
    point: np.ndarray
    classification: Classification
    hessian_eigenvalues: tuple[float, ...]
    definiteness: Definiteness
    linearization_spectrum: tuple[complex, ...] | None
    rationale: Rationale
    residual: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        spec = self.linearization_spectrum
        return {
            "point": _vec_json(self.point),
            "classification": self.classification.value,
            "rationale": self.rationale.value,
            "definiteness": self.definiteness.value,
            "hessian_eigenvalues": list(self.hessian_eigenvalues),
            "linearization_spectrum": None
            if spec is None
            else [{"re": float(z.real), "im": float(z.imag)} for z in spec],
            "residual": self.residual,
        }


def _classify(lo: float, hi: float, thr: float) -> Definiteness:
    if lo > thr:
        return Definiteness.POSITIVE_DEFINITE
    if hi < -thr:
        return Definiteness.NEGATIVE_DEFINITE
    if lo < -thr and hi > thr:
        return Definiteness.INDEFINITE
    return Definiteness.SEMIDEFINITE


def is_equilibrium(sys: PolySystem, x, tol: float = DEFAULT_TOL) -> bool:
    x = as_vector(x, sys.dim)
    scale = max(1.0, float(np.max(np.abs(x))))
    return float(np.max(np.abs(eval_rhs(sys, x)))) <= tol * scale


def newton_refine(sys: PolySystem, x0, max_iter: int = 50, tol: float = 1e-12) -> np.ndarray:
    """Newton iteration on ``eval_rhs(sys, x) = 0`` with the analytic Jacobian."""
    x = as_vector(x0, sys.dim).copy()
    for _ in range(max_iter + 1):
        if is_equilibrium(sys, x, tol):
            return x
        D = rhs_jacobian(sys, x)
        if np.linalg.cond(D) > 1e14:
            raise SingularJacobian(f"Jacobian is singular near {x.tolist()}")
        x = x - np.linalg.solve(D, eval_rhs(sys, x))
    raise NoConvergence(f"Newton did not reach tol={tol} in {max_iter} iterations")


def matrix_definiteness(M, tol: float = DEFAULT_TOL) -> DefinitenessVerdict:
    """Classify a symmetric matrix by its spectrum.

    Eigenvalues are compared against ``tol * max(1, max|M|)``.
    """
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {M.shape}")
    if np.max(np.abs(M - M.T), initial=0.0) > tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return DefinitenessVerdict(
        kind=_classify(w[0], w[-1], tol * scale),
        min_value=float(w[0]),
        max_value=float(w[-1]),
        minimizer=V[:, 0],
        maximizer=V[:, -1],
        threshold=tol * scale,
    )


def _start_points(n: int, restarts: int, rng: np.random.Generator) -> np.ndarray:
    """Coordinate axes, pairwise diagonals, then random directions."""
    pts = [np.eye(n)]
    if n > 1:
        iu, ju = np.triu_indices(n, 1)
        D = np.zeros((len(iu), n))
        D[np.arange(len(iu)), iu] = 1.0
        for s in (1.0, -1.0):
            E = D.copy()
            E[np.arange(len(iu)), ju] = s
            pts.append(E / np.sqrt(2.0))
    pts.append(rng.standard_normal((restarts, n)))
    X = np.vstack(pts)
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _sphere_maximize(arr: np.ndarray, X: np.ndarray, iters: int = 2000, newton_iters: int = 60):
    """Local maxima of ``arr x^k`` on the unit sphere from each row of ``X``.

    Shifted power iteration ``x <- normalize(arr x^(k-1) + alpha x)`` is a
    monotone projected gradient ascent once ``alpha`` exceeds the bound on
    the curvature used below.  A safeguarded Riemannian Newton phase then
    polishes each point; steps that lower the objective are rejected.
    """
    k, n = arr.ndim, arr.shape[0]
    alpha = (k - 1) * float(np.linalg.norm(arr)) + 1e-12
    for _ in range(iters):
        G = contract_batch(arr, X, k - 1)
        Xn = G + alpha * X
        Xn /= np.linalg.norm(Xn, axis=1, keepdims=True)
        done = np.max(np.abs(Xn - X)) < 1e-13
        X = Xn
        if done:
            break
    f = np.einsum("ri,ri->r", contract_batch(arr, X, k - 1), X)
    eye = np.eye(n)
    for _ in range(newton_iters):
        G = contract_batch(arr, X, k - 1)
        Hs = (k - 1) * contract_batch(arr, X, k - 2) if k > 2 else np.broadcast_to(arr, (len(X), n, n))
        lam = np.einsum("ri,ri->r", G, X)
        P = eye[None] - X[:, :, None] * X[:, None, :]
        Hr = P @ (Hs - lam[:, None, None] * eye[None]) @ P + X[:, :, None] * X[:, None, :]
        g = np.einsum("rij,rj->ri", P, G)
        try:
            eta = -np.linalg.solve(Hr, g[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            break
        Xn = X + eta
        Xn /= np.linalg.norm(Xn, axis=1, keepdims=True)
        fn = np.einsum("ri,ri->r", contract_batch(arr, Xn, k - 1), Xn)
        better = fn >= f
        X = np.where(better[:, None], Xn, X)
        f = np.where(better, fn, f)
    return f, X


def tensor_definiteness(
    B: CubicalTensor,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> DefinitenessVerdict:
    """Sign of the even-order form ``B x^k`` from its extremes on the unit sphere.

    Order 2 is decided exactly through the symmetric eigensolver.  Higher
    orders use multi-start sphere optimization; the result is flagged
    heuristic because a narrow region of the other sign could be missed.
    """
    if B.order % 2:
        raise OddOrder(f"definiteness needs an even order, got {B.order}")
    if not is_supersymmetric(B, tol):
        raise NotSupersymmetric("definiteness needs a supersymmetric tensor")
    if B.order == 2:
        return matrix_definiteness(B.data, tol)
    rng = np.random.default_rng(seed)
    X = _start_points(B.dim, restarts, rng)
    fmax, Xmax = _sphere_maximize(B.data, X)
    fmin, Xmin = _sphere_maximize(-B.data, X)
    fmin = -fmin
    i, j = int(np.argmin(fmin)), int(np.argmax(fmax))
    lo, hi = float(fmin[i]), float(fmax[j])
    thr = tol * max(1.0, B.max_abs())
    return DefinitenessVerdict(
        kind=_classify(lo, hi, thr),
        min_value=lo,
        max_value=hi,
        minimizer=Xmin[i],
        maximizer=Xmax[j],
        heuristic=True,
        threshold=thr,
    )


def _sample_hamiltonian(H: PolyHamiltonian, tol: float, seed: int, odd_orders, note: str):
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((4096, H.dim))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    best_lo, best_hi = (np.inf, None), (-np.inf, None)
    mixed = False
    for r in (1e-3, 1e-2, 1e-1, 1.0, 10.0):
        X = r * D
        vals = eval_H_batch(H, X)
        thr = tol * max(1.0, float(np.max(np.abs(vals))))
        mixed |= bool(vals.min() < -thr and vals.max() > thr)
        i, j = int(np.argmin(vals)), int(np.argmax(vals))
        if vals[i] < best_lo[0]:
            best_lo = (float(vals[i]), X[i])
        if vals[j] > best_hi[0]:
            best_hi = (float(vals[j]), X[j])
    lo, hi = best_lo[0], best_hi[0]
    if mixed or (lo < 0 < hi):
        kind = Definiteness.INDEFINITE
    else:
        kind = _classify(lo, hi, 0.0)
    return DefinitenessVerdict(
        kind=kind,
        min_value=lo,
        max_value=hi,
        minimizer=best_lo[1],
        maximizer=best_hi[1],
        heuristic=True,
        certified=False,
        odd_orders=tuple(odd_orders),
        note=note,
    )


def hamiltonian_definiteness(
    H: PolyHamiltonian,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> DefinitenessVerdict:
    """Global sign of ``H`` from the signs of its homogeneous parts.

    With only even orders present, ``H`` is positive definite when every
    ``B_j`` is positive semidefinite and at least one is positive definite
    (mirrored for negative).  Odd orders or parts of conflicting sign fall
    back to sampling ``H`` on spheres of several radii; that verdict is
    marked uncertified.
    """
    parts = {j: B for j, B in H.tensors.items() if not B.is_zero()}
    odd = sorted(j for j in parts if j % 2)
    if odd:
        return _sample_hamiltonian(H, tol, seed, odd, f"odd-order terms present: {odd}")
    if not parts:
        return DefinitenessVerdict(Definiteness.SEMIDEFINITE, 0.0, 0.0, certified=True)
    verdicts = {j: tensor_definiteness(B, restarts, tol, seed) for j, B in parts.items()}
    heuristic = any(v.heuristic for v in verdicts.values())
    # bounds of H on the unit sphere
    lo = sum(v.min_value for v in verdicts.values())
    hi = sum(v.max_value for v in verdicts.values())
    for sign_ok, strict, kind in (
        ("nonnegative", Definiteness.POSITIVE_DEFINITE, Definiteness.POSITIVE_DEFINITE),
        ("nonpositive", Definiteness.NEGATIVE_DEFINITE, Definiteness.NEGATIVE_DEFINITE),
    ):
        if all(getattr(v, sign_ok) for v in verdicts.values()):
            if any(v.kind == strict for v in verdicts.values()):
                return DefinitenessVerdict(kind, lo, hi, heuristic=heuristic)
            return DefinitenessVerdict(Definiteness.SEMIDEFINITE, lo, hi, heuristic=heuristic)
    return _sample_hamiltonian(H, tol, seed, (), "homogeneous parts of mixed sign")


def classify_equilibrium(H: PolyHamiltonian, x, tol: float = DEFAULT_TOL) -> StabilityVerdict:
    """Stability of an equilibrium of ``dx/dt = J grad H``."""
    J = symplectic_J(H.dim)
    x = as_vector(x, H.dim)
    residual = float(np.max(np.abs(J @ grad_H(H, x))))
    if residual > tol * max(1.0, float(np.max(np.abs(x)))):
        raise NotAnEquilibrium(f"{x.tolist()} is not an equilibrium (residual {residual:.3g})")
    M = hessian_H(H, x)
    dv = matrix_definiteness(M, tol)
    L = J @ M
    spectrum = np.linalg.eigvals(L)
    spectrum = tuple(sorted((complex(z) for z in spectrum), key=lambda z: (z.real, z.imag)))
    hev = tuple(float(w) for w in np.linalg.eigvalsh(0.5 * (M + M.T)))
    if dv.definite:
        cls, why = Classification.STABLE, Rationale.HESSIAN_DEFINITE
    elif max(z.real for z in spectrum) > tol * max(1.0, float(np.max(np.abs(L)))):
        cls, why = Classification.UNSTABLE, Rationale.LINEAR_INSTABILITY
    else:
        cls, why = Classification.INCONCLUSIVE, Rationale.NO_CRITERION
    return StabilityVerdict(x.copy(), cls, hev, dv.kind, spectrum, why, residual)
