"""Homology of labelled tree complexes, Hall bases and Levine's map."""

__version__ = "0.1.0"
