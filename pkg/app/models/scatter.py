# app/models/scatter.py
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from app.core.errors import ParameterError


class EstimatorKind(str, Enum):
    SAMPLE = "sample"
    FLOM = "flom"
    SSCM = "sscm"


@dataclass
class ScatterEstimate:
    matrix: np.ndarray
    kind: EstimatorKind
    flom_order: Optional[float] = None

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ParameterError("scatter estimate must be a square matrix")
        self.matrix = matrix
        self.kind = EstimatorKind(self.kind)
        if (self.kind == EstimatorKind.FLOM) != (self.flom_order is not None):
            raise ParameterError("flom_order is set exactly when kind is FLOM")

    @property
    def m(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def of(cls, matrix: np.ndarray) -> "ScatterEstimate":
        """Wrap a hand-built covariance (tests, constructed scenes) as a SAMPLE estimate."""
        return cls(matrix=matrix, kind=EstimatorKind.SAMPLE)
