"""FEM eigenvalue pipeline solved with a variational quantum eigensolver.

Pipeline stages: finite-element model generation or matrix ingestion,
reduction of (K, M) to a standard symmetric eigenproblem, Pauli-string
decomposition, and Rayleigh-quotient minimization on a statevector
simulator, cross-checked against a dense classical eigensolver.
"""

__version__ = "0.1.0"
