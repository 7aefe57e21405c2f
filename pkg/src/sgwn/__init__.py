"""Spectral graph wavelet transforms and spectral graph wavelet networks."""

__version__ = "0.1.0"
