"""Renormalized Yang-Mills energy and its conformal invariants on six-manifolds."""

__version__ = "0.1.0"
