"""Configuration management using Pydantic Settings.

This module provides type-safe configuration with validation,
loading settings from environment variables and .env files.
Scenario files carry per-experiment parameters; the settings here are the
process-wide numeric and output defaults they fall back to.
"""

from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class NumericsSettings(BaseSettings):
    """Quadrature, root-finding and moment-grid settings."""

    model_config = SettingsConfigDict(
        env_prefix="KZ_NUMERICS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    quadrature_tol: float = Field(
        default=1e-6,
        description="Absolute tolerance of the adaptive Gauss-Legendre engine",
        gt=0.0,
        le=1e-2,
    )
    panel_points: int = Field(
        default=15,
        description="Gauss-Legendre nodes per quadrature panel",
        ge=3,
        le=64,
    )
    max_panels: int = Field(
        default=50_000,
        description="Maximum number of panels before the quadrature gives up",
        gt=0,
    )
    moment_grid_min: int = Field(
        default=2048,
        description="Minimum number of points of a GPMoments grid",
        ge=16,
    )
    moment_grid_per_halfwidth: int = Field(
        default=50,
        description="Grid points per unit 1/h (grid size is max(min, this/h))",
        gt=0,
    )
    interpolation_refinement: int = Field(
        default=4,
        description="Subdivisions of each moment-grid cell when scanning for extrema",
        ge=1,
        le=64,
    )
    root_xtol: float = Field(
        default=1e-12,
        description="Location tolerance for zeros and extrema of M(t)",
        gt=0.0,
    )
    ppf_xtol: float = Field(
        default=1e-14,
        description="Tolerance of numeric cdf inversion",
        gt=0.0,
    )


class SimulationSettings(BaseSettings):
    """Monte Carlo defaults."""

    model_config = SettingsConfigDict(
        env_prefix="KZ_SIMULATION_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    counting_grid_size: int = Field(
        default=4097,
        description="Initial number of counting-grid nodes (2^k + 1 keeps refinement nested)",
        ge=257,
    )
    max_counting_grid_size: int = Field(
        default=65537,
        description="Cap on counting-grid nodes reached by automatic refinement",
        ge=257,
    )
    batch_size: int = Field(
        default=256,
        description="Replicates evaluated per sparse matrix product",
        gt=0,
    )
    workers: int = Field(
        default=4,
        description="Worker threads for replicate chunks (results do not depend on it)",
        gt=0,
        le=256,
    )
    auto_refine: bool = Field(
        default=True,
        description="Double the counting grid until the mean changes by < stderr/2",
    )


class OutputSettings(BaseSettings):
    """Output location and logging configuration."""

    model_config = SettingsConfigDict(
        env_prefix="KZ_OUTPUT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    output_dir: Path = Field(
        default=Path("results"),
        description="Default directory for scenario artifacts",
    )
    log_level: str = Field(
        default="info",
        description="Logging level",
        pattern="^(debug|info|warning|error|critical|DEBUG|INFO|WARNING|ERROR|CRITICAL)$",
    )
    structured_logs: bool = Field(
        default=False,
        description="Emit JSON log records instead of plain text",
    )
    float_format: str = Field(
        default=".12g",
        description="Format spec used for floats in result tables",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Normalize log level to uppercase."""
        return v.upper()


class Settings(BaseSettings):
    """Main application settings combining all configuration groups.

    Settings are loaded from:
    1. Environment variables
    2. .env file in the working directory
    3. Default values defined in each settings group

    Example:
        ```python
        from kernelzeros.config import get_settings

        settings = get_settings()
        print(settings.numerics.quadrature_tol)
        print(settings.simulation.workers)
        ```
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)

    app_name: str = Field(
        default="kernelzeros",
        description="Application name",
    )
    app_version: str = Field(
        default="0.1.0",
        description="Application version",
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance.

    The settings are loaded once and reused for the lifetime of the process.
    Tests that patch the environment call ``get_settings.cache_clear()``.

    Returns:
        Settings: Configured application settings
    """
    return Settings()
