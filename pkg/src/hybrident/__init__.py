"""Truncated Fock-space simulation of heralded hybrid DV-CV entanglement."""

__version__ = "0.1.0"
