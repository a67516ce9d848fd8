"""Relaxed-memory toolkit: axiomatic models, litmus enumeration, mappings,
fence elimination and robustness checking."""

__version__ = "0.1.0"
