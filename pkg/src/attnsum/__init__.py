"""Attention-driven video summarization from EEG and eye-tracking recordings."""

__version__ = "0.1.0"
