"""Finite locales, lower power locales, and a numerical model of the Bohr locale."""

__version__ = "0.1.0"
