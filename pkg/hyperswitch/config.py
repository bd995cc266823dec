"""Toolkit configuration using Pydantic Settings."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix ``HYPERSWITCH_``)."""

    model_config = SettingsConfigDict(
        env_prefix="HYPERSWITCH_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Numerical tolerances
    tol_feas: float = Field(default=1e-9, description="Acceptance threshold on lambda_min of slacks, weights normalized to max 1")
    tol_ker: float = Field(default=1e-8, description="Relative kernel detection threshold")
    tol_rank: float = Field(default=1e-9, description="Relative rank threshold for null-space bases")
    tol_hyp: float = Field(default=1e-9, description="Smallest admissible characteristic speed")
    tol_recon: float = Field(default=1e-10, description="Relative reconstruction tolerance")
    q_floor: float = Field(default=1e-8, description="Lower bound on every diagonal weight entry")

    # Batch runs
    output_dir: str = Field(default="outputs", description="Default directory for CLI artifacts")
    default_jobs: int = Field(default=1, ge=1, description="Default worker count for sweeps and searches")
    default_seed: int = Field(default=0, description="Default seed for randomized runs")

    # Logging Configuration
    log_level: str = Field(default="INFO", description="Log level (DEBUG, INFO, WARNING, ERROR)")
    log_json: bool = Field(default=False, description="Use JSON log format")
    log_file: str | None = Field(default=None, description="Optional log file path")


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
