"""Renormalization toolkit for SL(2,R) cocycles over 2-interval exchanges."""

__version__ = "0.1.0"
