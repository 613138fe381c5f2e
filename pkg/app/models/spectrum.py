# app/models/spectrum.py
from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from app.core.errors import ParameterError


class SpectrumMethod(str, Enum):
    CAPON = "capon"
    MUSIC = "music"
    MUSIC_LIKE_FIXED = "music_like_fixed"
    MUSIC_LIKE_ADAPTIVE = "music_like_adaptive"

    @property
    def is_music_like(self) -> bool:
        return self in (SpectrumMethod.MUSIC_LIKE_FIXED, SpectrumMethod.MUSIC_LIKE_ADAPTIVE)


@dataclass
class EigenDecomposition:
    """Eigenvalues in descending order; eigenvectors as orthonormal columns in the same order."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def u_min(self) -> np.ndarray:
        return self.eigenvectors[:, -1]

    def noise_subspace(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k:]


@dataclass
class BetaBounds:
    beta_min: float
    beta_max: float
    source_set_estimate: List[float] = field(default_factory=list)
    fallback: bool = False

    def __post_init__(self):
        if not (0.0 < self.beta_min <= self.beta_max):
            raise ParameterError(f"invalid beta bounds ({self.beta_min}, {self.beta_max})")

    @property
    def xi(self) -> float:
        return float(self.beta_min / self.beta_max)

    @property
    def delta(self) -> float:
        return float(self.beta_max - self.beta_min)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta_min": float(self.beta_min),
            "beta_max": float(self.beta_max),
            "xi": self.xi,
            "source_set_estimate": [float(t) for t in self.source_set_estimate],
            "fallback": bool(self.fallback),
        }


@dataclass
class Spectrum:
    grid: np.ndarray
    values_db: np.ndarray
    method: SpectrumMethod
    beta_trace: Optional[np.ndarray] = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values_db = np.asarray(self.values_db, dtype=float)
        self.method = SpectrumMethod(self.method)
        if self.grid.shape != self.values_db.shape:
            raise ParameterError("grid and values_db must have equal length")
        if (self.beta_trace is not None) != self.method.is_music_like:
            raise ParameterError("beta_trace is present exactly for MUSIC-like spectra")
        if self.beta_trace is not None:
            self.beta_trace = np.asarray(self.beta_trace, dtype=float)
            if self.beta_trace.shape != self.grid.shape:
                raise ParameterError("beta_trace must match the grid")

    def to_rows(self) -> List[Dict[str, Any]]:
        beta = self.beta_trace if self.beta_trace is not None else [None] * len(self.grid)
        return [
            {"angle_deg": float(t), "value_db": float(v), "beta": None if b is None else float(b)}
            for t, v, b in zip(self.grid, self.values_db, beta)
        ]
