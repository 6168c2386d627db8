"""Configuration"""

from .settings import EngineSettings, configure, load_settings, get_settings

__all__ = [
    "EngineSettings",
    "configure",
    "load_settings",
    "get_settings",
]
