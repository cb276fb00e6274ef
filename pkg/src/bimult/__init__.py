"""Numerical laboratory for bilinear Fourier multipliers with Hormander-type symbols."""

__version__ = "0.1.0"
