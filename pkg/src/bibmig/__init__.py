"""Geo-tagging of bibliographic corpora by label propagation, plus
researcher-migration timing analysis and link analysis of the resulting
inter-city migration graph."""

__version__ = "0.1.0"
