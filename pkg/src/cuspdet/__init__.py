"""Determinants of Laplacians on cusped hyperbolic surfaces via the Selberg zeta function."""

__version__ = "0.1.0"
