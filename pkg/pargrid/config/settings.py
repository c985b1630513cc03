"""
Runtime settings.

Values come from the environment (``PARGRID_*``) or an optional ``.env``
file; CLI flags override them by passing explicit arguments.
"""

import os
from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


def _default_start_method() -> str:
    return "fork" if os.name == "posix" else "spawn"


class Settings(BaseSettings):
    """Launch, transport and logging configuration."""

    model_config = SettingsConfigDict(
        env_prefix="PARGRID_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Transport
    timeout_s: float = Field(default=60.0, gt=0)
    backend: Literal["inproc", "socket"] = "inproc"
    socket_host: str = "127.0.0.1"

    # Worker processes
    start_method: Literal["fork", "spawn", "forkserver"] = Field(default_factory=_default_start_method)
    grace_period_s: float = Field(default=1.0, ge=0)

    # Logging
    log_level: str = "INFO"


@lru_cache()
def get_settings() -> Settings:
    """Return the process-wide settings instance."""

    return Settings()
