"""Exact Walsh analysis on the dyadic group."""

__version__ = "0.1.0"
