# app/models/array.py
from __future__ import annotations
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.core.errors import ParameterError


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array; spacing is in half-wavelengths, first sensor at the origin."""
    m: int
    spacing: float = 1.0

    def __post_init__(self):
        if int(self.m) < 2:
            raise ParameterError(f"array needs at least 2 sensors, got {self.m}")
        if not float(self.spacing) > 0.0:
            raise ParameterError(f"spacing must be > 0, got {self.spacing}")


@dataclass(frozen=True)
class SourceScene:
    """
    Far-field narrowband sources. Angles are in degrees from the array axis and
    powers are mean-square amplitudes E|s|^2 (unit power when omitted).
    """
    doas: List[float] = field(default_factory=list)
    powers: Optional[List[float]] = None

    def __post_init__(self):
        doas = [float(d) for d in self.doas]
        for d in doas:
            if not (0.0 < d < 180.0):
                raise ParameterError(f"DOA {d} deg is outside (0, 180)")
        if len(set(doas)) != len(doas):
            raise ParameterError(f"DOAs must be pairwise distinct, got {doas}")
        if self.powers is not None:
            if len(self.powers) != len(doas):
                raise ParameterError("powers must have one entry per DOA")
            if any(float(p) <= 0.0 for p in self.powers):
                raise ParameterError("source powers must be > 0")
        object.__setattr__(self, "doas", doas)

    @property
    def k(self) -> int:
        return len(self.doas)

    def power_vector(self) -> np.ndarray:
        if self.powers is None:
            return np.ones(self.k)
        return np.asarray(self.powers, dtype=float)


@dataclass
class SnapshotMatrix:
    """M x N block of complex sensor data, one column per snapshot."""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ParameterError("snapshot data must be a 2-D (sensors x snapshots) array")
        self.data = data.astype(complex, copy=False)

    @property
    def m(self) -> int:
        return int(self.data.shape[0])

    @property
    def n(self) -> int:
        return int(self.data.shape[1])
