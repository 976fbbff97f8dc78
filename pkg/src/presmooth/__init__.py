"""Wavelet pre-smoothing and local-rate analysis for nonlinear inverse problems."""

__version__ = "0.1.0"
