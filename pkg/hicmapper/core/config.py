"""
Configuration settings for the hicmapper pipeline.

Defaults follow the single-cell Hi-C analysis this pipeline was built for
(500kb bins, 3x3 smoothing, two spectral filters, 100 bootstrap draws at
90% confidence). Override any of them with HICMAPPER_* environment
variables or a .env file.
"""

from typing import Optional
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Pipeline settings."""

    # Ingestion
    bin_size: int = 500000
    smoothing_radius: int = 1
    near_max: int = 2_000_000
    mitotic_min: int = 2_000_000
    mitotic_max: int = 12_000_000
    bands_on_smoothed: bool = False
    dense_csv: bool = False

    # SCC
    max_separation: Optional[int] = None  # uncapped

    # Spectral filters
    n_filters: int = 2
    scale_by_sqrt_eigenvalue: bool = True

    # Mapper
    gain: float = 0.4
    beta: float = 0.05
    delta_draws: int = 10
    node_function: str = "mean"

    # Bootstrap
    bootstrap_iterations: int = 100
    confidence_level: float = 0.90

    # Execution
    workers: int = 1

    # Logging Configuration
    log_level: str = "INFO"
    log_file: Optional[str] = None

    class Config:
        env_prefix = "HICMAPPER_"
        env_file = ".env"
        env_file_encoding = "utf-8"


settings = Settings()
