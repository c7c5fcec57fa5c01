"""Continuette: a small imperative language with declarative future commitments."""

from __future__ import annotations

__version__ = "0.1.0"
