"""Hayden-Preskill decoding error in brickwork qudit circuits."""

__version__ = "0.1.0"
