"""
Measbench settings - environment-driven defaults shared by the CLI and runtime.
"""

from __future__ import annotations

import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

from measbench.core.errors import ConfigError

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings:
    """Application settings."""

    def __init__(self):
        self.log_level = os.environ.get("MEASBENCH_LOG_LEVEL", "INFO").upper()

        cache_dir = os.environ.get("MEASBENCH_CACHE_DIR")
        self.cache_dir: Optional[Path] = Path(cache_dir) if cache_dir else None

        try:
            self.max_parallel = int(os.environ.get("MEASBENCH_MAX_PARALLEL", "2"))
            self.default_epsilon = float(os.environ.get("MEASBENCH_DEFAULT_EPSILON", "1e-3"))
        except ValueError as e:
            raise ConfigError(f"Invalid MEASBENCH_* environment value: {e}") from e
        if self.max_parallel < 1:
            raise ConfigError("MEASBENCH_MAX_PARALLEL must be at least 1")
        if self.default_epsilon <= 0:
            raise ConfigError("MEASBENCH_DEFAULT_EPSILON must be positive")


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings."""
    return Settings()


def configure_logging(level: Optional[str] = None):
    """Install one stream handler on the package logger."""
    level = (level or get_settings().log_level).upper()
    logger = logging.getLogger("measbench")
    if not any(getattr(h, "_measbench", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._measbench = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    logger.setLevel(level)
