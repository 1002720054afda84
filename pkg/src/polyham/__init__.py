"""Hamiltonian structure and stability of polynomial systems via cubical tensors."""

__version__ = "0.1.0"

from .hamiltonian import (
    PolyHamiltonian,
    PolySystem,
    build_system,
    decompose,
    eval_H,
    eval_rhs,
    extract_hamiltonian,
    grad_H,
    hessian_H,
    is_hamiltonian_tensor,
    is_hamiltonian_tensor_def,
    symplectic_J,
    system_is_hamiltonian,
)
from .polyparse import emit_hamiltonian, emit_system, parse_hamiltonian, parse_system
from .stability import (
    classify_equilibrium,
    hamiltonian_definiteness,
    matrix_definiteness,
    newton_refine,
    tensor_definiteness,
)
from .tensor import CubicalTensor, Permutation, make_tensor, mat_tensor, symmetrize, tvp

__all__ = [
    "CubicalTensor",
    "Permutation",
    "PolyHamiltonian",
    "PolySystem",
    "build_system",
    "classify_equilibrium",
    "decompose",
    "emit_hamiltonian",
    "emit_system",
    "eval_H",
    "eval_rhs",
    "extract_hamiltonian",
    "grad_H",
    "hamiltonian_definiteness",
    "hessian_H",
    "is_hamiltonian_tensor",
    "is_hamiltonian_tensor_def",
    "make_tensor",
    "mat_tensor",
    "matrix_definiteness",
    "newton_refine",
    "parse_hamiltonian",
    "parse_system",
    "symmetrize",
    "symplectic_J",
    "system_is_hamiltonian",
    "tensor_definiteness",
    "tvp",
]
