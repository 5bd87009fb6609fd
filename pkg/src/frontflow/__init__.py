"""Anisotropic threshold dynamics with forcing, limit-flow quantities and a level-set reference solver."""

__version__ = "0.1.0"
