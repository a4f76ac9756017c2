"""Fragmented monitoring: condition synthesis, fragment collection, trace reconstruction."""

__version__ = "0.1.0"
