"""Overlapping substitution tilings: rules, realization, certificates."""

__version__ = "0.1.0"
