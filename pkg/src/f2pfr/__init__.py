"""Executable additive combinatorics over F_2^n."""

__version__ = "0.1.0"
