"""Exact construction and numerical certification of knotted polynomial fields."""

__version__ = "0.1.0"
