"""Finite-blocklength analysis of hash-based codes for the degraded wiretap channel."""

from .probability import Channel, Distribution, JointDistribution

__all__ = ["Channel", "Distribution", "JointDistribution"]
__version__ = "0.1.0"
