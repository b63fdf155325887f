"""Application Configuration Management"""

from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Solver settings loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="CUBEPATHS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Application
    app_name: str = "cubepaths"
    app_version: str = "1.0.0"
    log_level: str = "WARNING"

    # Reproducibility
    seed: int = 20240517

    # Strategy ladder
    retries: int = Field(default=32, ge=1)
    max_fanout: int = Field(default=4, ge=1)
    base_dimension: int = Field(default=5, ge=1, le=5)

    # Search budgets
    fallback_budget: int = Field(default=200000, ge=1)
    exhaustive_budget: Optional[int] = Field(default=None, ge=1)

    # Parallelism
    threads: int = Field(default=1, ge=1)

    # Record sink
    sink_backend: str = "memory"  # "memory" or "jsonl"
    regression_path: str = "regressions.jsonl"

    # JSON surface
    schema_version: int = 1

    @field_validator("log_level")
    @classmethod
    def upper_level(cls, v: str) -> str:
        return v.upper()


# Global settings instance
settings = Settings()
