"""Efficiency ordering of SGD input sequences: kernels, asymptotic covariances, CLT tools."""

__version__ = "0.1.0"
