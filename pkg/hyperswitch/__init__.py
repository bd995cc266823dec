"""Lyapunov certification and upwind simulation of switched linear hyperbolic systems."""

__version__ = "0.1.0"
