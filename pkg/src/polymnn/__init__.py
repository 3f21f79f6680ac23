"""Multiplicative neural networks for polynomial learning and simulation metamodels."""
__version__ = "0.1.0"
