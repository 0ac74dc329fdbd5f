"""Capacity regions, schemes and bound checks for multi-user two-way networks."""

__version__ = "0.1.0"
