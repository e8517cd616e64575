"""
Application configuration using Pydantic Settings.
"""
import os
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables."""

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Sweep concurrency cap (0 = machine default)
    FLOCK_THREADS: int = Field(default=0, ge=0)

    # Integration grid
    DEFAULT_STEPS_PER_DELAY: int = Field(default=64, ge=1)

    # Diagnostics
    DENSE_SAMPLES_PER_STEP: int = Field(default=8, ge=2)
    CHECK_TOLERANCE: float = Field(default=1e-4, gt=0)
    VELOCITY_HULL_DIRECTIONS: int = Field(default=64, ge=1)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )

    @field_validator("DENSE_SAMPLES_PER_STEP")
    @classmethod
    def validate_even_samples(cls, v: int) -> int:
        """Composite Simpson needs an even number of panels per step."""
        if v % 2:
            raise ValueError("DENSE_SAMPLES_PER_STEP must be even")
        return v

    def sweep_workers(self) -> int:
        """
        Resolve the sweep concurrency cap.

        Returns:
            Number of concurrent sweep members
        """
        if self.FLOCK_THREADS > 0:
            return self.FLOCK_THREADS
        return os.cpu_count() or 1


# Singleton instance
settings = Settings()
