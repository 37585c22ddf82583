"""Cascaded pathology classification for Spanish dermatology notes."""

__version__ = "0.1.0"
