"""Upwind simulation, Lyapunov traces and decay fits."""

from .engine import simulate

__all__ = ["simulate"]
