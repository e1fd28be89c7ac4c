"""Pompeiu Lab - numerical laboratory for the Pompeiu problem on star-shaped domains."""

__version__ = "0.1.0"
