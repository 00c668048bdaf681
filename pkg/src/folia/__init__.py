"""Exact computations with logarithmic foliations on projective space."""

__version__ = "0.1.0"
