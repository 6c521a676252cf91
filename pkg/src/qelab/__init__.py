"""Numerical checks for quasimodes, KAM conjugacies and eigenvalue flows on mixed billiards."""

__version__ = "0.1.0"
