"""Process-level settings for the rough-clt experiment runner."""

from pathlib import Path
from typing import ClassVar

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """
    Application settings using pydantic BaseSettings.

    Only the output directory is read from the environment (OUTPUT_DIR or .env).
    The remaining values are pinned so a stray variable cannot change a run.
    """

    # Tool
    tool_name: ClassVar[str] = "rough-clt"
    tool_version: ClassVar[str] = "0.1.0"

    # Paths
    output_dir: Path = Path("runs")
    examples_dir: ClassVar[Path] = Path("data/examples")

    # Run defaults
    threads: ClassVar[int] = 1

    class Config:
        """Pydantic config."""

        env_file = ".env"
        case_sensitive = False
        env_file_encoding = "utf-8"


# Global settings instance
settings = Settings()
