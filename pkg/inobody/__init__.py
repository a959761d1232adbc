"""Exact infinitesimal Newton-Okounkov bodies: Borel-fixed shapes, flag valuations, Zariski chambers."""

__version__ = "0.1.0"
