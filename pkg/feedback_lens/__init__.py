"""Feedback topology classification and output impedance cross checks."""

__version__ = "1.0.0"
