"""Runtime configuration."""
from __future__ import annotations

from prg_verify.config.settings import Settings, settings

__all__ = ["Settings", "settings"]
