"""Numerical laboratory for interface depinning by random precipitate fields."""

__version__ = "0.1.0"
