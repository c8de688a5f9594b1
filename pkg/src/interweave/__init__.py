"""Analytical model of interweave cognitive-radio spectrum sharing."""

__version__ = "0.1.0"
