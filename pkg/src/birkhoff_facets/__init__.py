"""Exact facet enumeration for convex hulls of finite real matrix groups."""

__version__ = "0.1.0"
