"""Multilinear Hardy-type operators on the Heisenberg group, with their
sharp constants and BMO seminorm estimates."""

__version__ = "0.1.0"
