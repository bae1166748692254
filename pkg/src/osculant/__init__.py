"""Osculating spaces and higher-order normal curvatures of parametrized immersions."""

__version__ = "0.1.0"
