"""Exact Hecke-operator machinery for Fourier coefficients indexed by even
integral lattices over totally real fields (Q and real quadratic in v1)."""

__version__ = "0.1.0"
