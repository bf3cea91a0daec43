"""Numerical laboratory for dispersive decay of the Klein-Gordon equation in a moving frame."""

__version__ = "0.1.0"
