"""Lyapunov certificate search, dwell-time bounds and certificate audits."""

from .engine import certificate_from_weights, certify, dwell_time_bound, effective_rate

__all__ = ["certify", "certificate_from_weights", "dwell_time_bound", "effective_rate"]
