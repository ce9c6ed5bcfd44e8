"""Frequency-loss forecasting laboratory."""

__version__ = "0.1.0"
