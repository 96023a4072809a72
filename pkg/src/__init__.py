"""PIVOT - iterative visual prompting optimizer."""

__version__ = "0.1.0"
