"""Orbital correlation and entanglement under fermionic superselection rules."""

__version__ = "0.1.0"
