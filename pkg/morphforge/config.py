# morphforge/config.py

import logging
import os
import sys
from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process-level settings."""

    # Debug and logging
    log_level: str = Field(default="INFO", description="Logging level")

    # Worker pool
    workers: int = Field(
        default=1, ge=1, description="Worker processes for per-image tasks"
    )

    # Output
    float_format: str = Field(
        default=".10g", description="Format spec for floats written to CSV files"
    )

    model_config = SettingsConfigDict(
        env_prefix="MORPHFORGE_",
        env_file=os.getenv("ENV_FILE", ".env"),
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level")
    def validate_log_level(cls, v: str) -> str:
        """Validate logging level."""
        allowed_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed_levels:
            raise ValueError(f"Log level must be one of: {allowed_levels}")
        return v.upper()

    @field_validator("float_format")
    def validate_float_format(cls, v: str) -> str:
        """Validate the float format spec."""
        try:
            format(0.5, v)
        except ValueError as e:
            raise ValueError(f"Invalid float format spec '{v}': {e}")
        return v


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    settings = Settings()
    logging.getLogger().setLevel(settings.log_level)
    return settings


def format_float(value: float) -> str:
    """Format a float for CSV output with the configured spec."""
    return format(float(value), get_settings().float_format)
