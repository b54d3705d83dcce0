"""Quantum-selected configuration interaction in the CI-matrix qubit encoding."""

__version__ = "0.1.0"
