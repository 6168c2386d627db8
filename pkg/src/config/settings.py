"""Engine settings"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


DEFAULT_CONFIG_PATH = "config/sigmarho.yaml"
ENV_PREFIX = "SIGMARHO_"


class EngineSettings(BaseSettings):
    """Tunable limits of the oracle, the DP and the reduction builders"""

    model_config = SettingsConfigDict(env_prefix=ENV_PREFIX, case_sensitive=False)

    oracle_cap: int = Field(
        default=26,
        gt=0,
        description="Largest search size (bits) the exhaustive oracle accepts"
    )

    dp_max_states: int = Field(
        default=2_000_000,
        gt=0,
        description="Upper bound on live DP table entries"
    )

    seed: int = Field(
        default=0,
        ge=0,
        description="Seed for randomised sweeps"
    )

    log_level: str = Field(
        default="INFO",
        description="loguru level used by the command line"
    )

    default_group_width: int = Field(
        default=1,
        ge=1,
        description="Group width g of the SAT compiler"
    )

    winner_search_limit: int = Field(
        default=12,
        gt=0,
        description="Largest fan-out tried by the winner search"
    )

    isolation_search_limit: int = Field(
        default=64,
        gt=0,
        description="Largest x tried when certifying isolation inequalities"
    )

    sat_relation_arity_cap: int = Field(
        default=22,
        gt=0,
        description="Largest relation scope enumerated by the SAT compiler"
    )

    default_engine: str = Field(
        default="oracle",
        description="Counting back end used when none is given"
    )


def _read_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        logger.warning(f"config file not found: {path}, using defaults")
        return {}
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    return data.get("engine", {}) or {}


def load_settings(config_path: Optional[str] = None) -> EngineSettings:
    """
    Load settings from YAML, letting environment variables win.

    Args:
        config_path: YAML file with an ``engine:`` section

    Returns:
        EngineSettings
    """
    load_dotenv()
    values = _read_yaml(Path(config_path or DEFAULT_CONFIG_PATH))
    # environment beats the file
    values = {
        key: value for key, value in values.items()
        if f"{ENV_PREFIX}{key}".upper() not in {k.upper() for k in os.environ}
    }
    return EngineSettings(**values)


_settings: Optional[EngineSettings] = None


def get_settings() -> EngineSettings:
    """Process-wide settings, loaded on first use."""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def configure(config_path: Optional[str] = None, **overrides: Any) -> EngineSettings:
    """
    Replace the process-wide settings: reload from config_path and apply
    the overrides that are not None. Used by the command line.
    """
    global _settings
    settings = load_settings(config_path)
    updates = {key: value for key, value in overrides.items() if value is not None}
    _settings = EngineSettings(**{**settings.model_dump(), **updates}) if updates else settings
    return _settings
