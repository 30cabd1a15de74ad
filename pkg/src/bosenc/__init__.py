"""Qubit encodings of truncated bosonic modes and variational squeezing simulation."""

__version__ = "0.1.0"
