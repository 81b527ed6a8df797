"""Comparison figures for edge-faas-sim result tables."""

__version__ = "0.1.0"
