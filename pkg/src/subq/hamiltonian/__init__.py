"""CI-matrix construction: FCIDUMP integrals, determinant basis, Slater-Condon rules."""

from subq.hamiltonian.cim import CIMatrix, build_cim, load_matrix, save_matrix
from subq.hamiltonian.determinants import (
    ConfigurationBasis,
    Determinant,
    enumerate_determinants,
    excitation_degree,
    slater_condon_element,
)
from subq.hamiltonian.integrals import (
    IntegralTable,
    parse_fcidump,
    random_integrals,
    read_fcidump,
    write_fcidump,
)

__all__ = [
    "CIMatrix",
    "ConfigurationBasis",
    "Determinant",
    "IntegralTable",
    "build_cim",
    "enumerate_determinants",
    "excitation_degree",
    "load_matrix",
    "parse_fcidump",
    "random_integrals",
    "read_fcidump",
    "save_matrix",
    "slater_condon_element",
    "write_fcidump",
]
