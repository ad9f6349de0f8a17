"""Vibrating perfectly elastic strings in Riemannian surfaces via the wave map equation."""

__version__ = "0.1.0"
