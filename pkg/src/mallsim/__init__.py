"""Desk-scale simulator and planning engine for a mall guidance robot."""

__version__ = "0.1.0"
