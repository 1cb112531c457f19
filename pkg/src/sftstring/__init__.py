"""Symbolic checkers for graded Weyl algebras, BV-infinity structures,
and the Goldman-Turaev string topology of surfaces."""

__version__ = "0.1.0"
