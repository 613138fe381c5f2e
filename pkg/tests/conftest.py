# tests/conftest.py
import os
import sys
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

# ensure project root is importable
ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from app.config import Settings, get_settings  # noqa: E402
from app.main import app  # noqa: E402
from app.api.schemas.experiment import ExperimentConfig, parse_config  # noqa: E402
from app.models.array import ArrayGeometry  # noqa: E402


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    """
    Every test writes results into its own temp directory, for both the CLI
    (environment settings) and the API (dependency override).
    """
    out = tmp_path / "results"
    monkeypatch.setenv("OUTPUT_DIR", str(out))
    get_settings.cache_clear()
    app.dependency_overrides[get_settings] = lambda: Settings(OUTPUT_DIR=out)
    try:
        yield out
    finally:
        app.dependency_overrides.pop(get_settings, None)
        get_settings.cache_clear()


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def geom10():
    return ArrayGeometry(m=10)


@pytest.fixture
def small_config():
    """
    Build a cheap ExperimentConfig: coarse grid, few trials. Keyword arguments
    are merged over the defaults (nested sections as dicts).
    Usage: cfg = small_config(trials=5, noise={"alphas": [2.0], "gsnr_db": [10.0]})
    """
    def _fn(**overrides) -> ExperimentConfig:
        data = {
            "geometry": {"sensors": 8, "grid_step": 1.0, "grid_margin": 1.0},
            "scene": {"doas": [40.0, 100.0]},
            "snapshots": 60,
            "noise": {"alphas": [2.0], "gsnr_db": [10.0]},
            "methods": ["music", "music_like_fixed", "music_like_adaptive"],
            "trials": 4,
            "master_seed": 7,
        }
        for key, value in overrides.items():
            if isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        return parse_config(data)
    return _fn


def write_yaml(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path
