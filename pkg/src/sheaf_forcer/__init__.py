"""Sheaf semantics for finite equivariant structures."""

__version__ = "0.1.0"
