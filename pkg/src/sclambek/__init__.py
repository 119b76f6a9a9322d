"""Lambek calculus and infinitary action logic over syntactic concept lattices."""

__version__ = "0.1.0"
