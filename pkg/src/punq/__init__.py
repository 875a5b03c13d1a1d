"""Exact interpreter, type checker and verification tools for a quantum lambda calculus."""

__version__ = "0.1.0"
