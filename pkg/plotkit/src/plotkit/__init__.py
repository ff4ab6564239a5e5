"""Batch figure generation for the lattice-field experiment outputs."""

__version__ = "0.1.0"
