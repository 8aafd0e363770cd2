"""Factorization of equal-bit-length multi-prime composites by Hamiltonian
kernel encoding and phase-matched amplitude amplification."""

__version__ = "0.1.0"
