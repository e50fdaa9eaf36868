"""Causal-signal transforms, contour checks and Kramers-Kronig consistency tools."""

__version__ = "0.1.0"
