"""Continuous first-order logic over dyadic truth values, probabilistic
computable structures, and exact toolkits for the spaces they describe."""

__version__ = "0.1.0"
