"""Exact-arithmetic workbench for controlled chain algebra and K-/L-transfers."""

__version__ = "0.1.0"
