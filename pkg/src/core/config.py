"""Configuration management for ANP-Lab."""

from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Ambient settings; experiment hyperparameters live in their own models."""

    model_config = SettingsConfigDict(
        env_prefix="ANP_", env_file=".env", case_sensitive=False, extra="ignore"
    )

    # Logging
    log_level: str = Field(default="INFO")
    show_progress: bool = Field(default=False)

    # Paths
    output_dir: str = Field(default="runs")
    mnist_dir: Optional[str] = Field(default=None)

    # Data
    train_subset: int = Field(default=10_000)
    test_subset: int = Field(default=2_000)
    eval_batch_size: int = Field(default=500)

    # Ablation
    n_jobs: int = Field(default=1)

    # Structure metrics
    boundary_directions: int = Field(default=100)
    boundary_step: float = Field(default=0.01)
    boundary_cap: float = Field(default=10.0)
    structure_samples: int = Field(default=100)
    insensitivity_eps: float = Field(default=0.1)
    polluted_per_image: int = Field(default=10)

    # Corruption metrics
    sequence_frames: int = Field(default=11)
    flip_samples: int = Field(default=200)


# Global settings instance
settings = Settings()
