# app/config.py
from pydantic_settings import BaseSettings
from pydantic import ConfigDict
from pathlib import Path
from functools import lru_cache


class Settings(BaseSettings):
    ENV: str = "development"
    OUTPUT_DIR: Path = Path("results")  # CSV / JSON run artifacts land here
    DEFAULT_SEED: int = 20240601
    THREADS: int = 1
    LOG_LEVEL: str = "INFO"

    # Example .env:
    # OUTPUT_DIR=./results
    # THREADS=4

    model_config = ConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Return cached Settings instance."""
    return Settings()


settings = Settings()
