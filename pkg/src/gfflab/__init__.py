"""Numerical laboratory for the 2D Gaussian free field random conductance model."""

__version__ = "0.1.0"
