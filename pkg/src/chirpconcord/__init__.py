"""Chirp-feature outlier detection and seizure-onset-zone concordance."""

__version__ = "0.1.0"
