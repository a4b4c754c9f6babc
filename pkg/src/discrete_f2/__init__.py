"""Faithful discrete actions of the free group of rank two on the unit interval."""

__version__ = "0.1.0"
