"""Numerical toolkit for zero sets of the Dirichlet space."""

__version__ = "0.1.0"
