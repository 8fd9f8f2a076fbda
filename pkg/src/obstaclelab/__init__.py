"""Numerical toolkit for two-dimensional obstacle-problem solutions and their blow-downs."""

__version__ = "0.1.0"
