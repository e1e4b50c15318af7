"""Bayesian optimization over sets with exact and subsampled set kernels."""

__version__ = "0.1.0"
