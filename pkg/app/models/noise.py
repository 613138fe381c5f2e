# app/models/noise.py
from __future__ import annotations
from dataclasses import dataclass, asdict
from typing import Any, Dict

from app.core.errors import ParameterError


@dataclass(frozen=True)
class NoiseParams:
    """
    Symmetric alpha-stable noise law. Location and skewness are pinned at zero;
    they are kept as fields so the parameter set reads the same as S(alpha, skew, gamma, mu).
    """
    alpha: float
    gamma: float
    mu: float = 0.0
    skew: float = 0.0

    def __post_init__(self):
        if not (0.0 < float(self.alpha) <= 2.0):
            raise ParameterError(f"alpha must be in (0, 2], got {self.alpha}")
        if not float(self.gamma) > 0.0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if float(self.mu) != 0.0:
            raise ParameterError("only zero-location noise is supported (mu = 0)")
        if float(self.skew) != 0.0:
            raise ParameterError("only symmetric noise is supported (skew = 0)")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
