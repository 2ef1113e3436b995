"""Entire spacelike surfaces of prescribed curvature in Minkowski 3-space."""

__version__ = "0.1.0"
