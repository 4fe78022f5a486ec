"""Exact probabilistic rely-guarantee verification over bundle event structures."""
from __future__ import annotations

__version__ = "0.1.0"
