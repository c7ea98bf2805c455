"""Cyclic reduction of elliptic curves with prescribed rational torsion."""

__version__ = "0.1.0"
