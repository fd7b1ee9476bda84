"""Clock networks N_n(R) over Z_s: solvability, circuit matrices and factorizations."""
from clocknet.constructions import (
    CircuitMatrix,
    family_13,
    full_clock_matrix,
    gim,
    paper_matrix,
    universal_validate,
    validate_circuit_matrix,
)
from clocknet.factorization import Factorization, identity_factorization, verify_factorization
from clocknet.network import ClockSpec, LinearCircuit, build_clock_network, check_solves, gcd_reduce
from clocknet.search import find_linear_solution, linear_solvable, nonlinear_solvable_z2, solvable_set

__all__ = [
    "CircuitMatrix",
    "ClockSpec",
    "Factorization",
    "LinearCircuit",
    "build_clock_network",
    "check_solves",
    "family_13",
    "find_linear_solution",
    "full_clock_matrix",
    "gcd_reduce",
    "gim",
    "identity_factorization",
    "linear_solvable",
    "nonlinear_solvable_z2",
    "paper_matrix",
    "solvable_set",
    "universal_validate",
    "validate_circuit_matrix",
    "verify_factorization",
]
