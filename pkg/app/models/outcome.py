# app/models/outcome.py
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from app.core.errors import ParameterError


@dataclass
class TrialOutcome:
    estimated_doas: List[float] = field(default_factory=list)
    resolved: bool = False
    rmse_deg: Optional[float] = None

    def __post_init__(self):
        if self.resolved != (self.rmse_deg is not None):
            raise ParameterError("rmse_deg is present exactly for resolved trials")


@dataclass
class ResultRow:
    method: str
    alpha: float
    gsnr_db: float
    trials: int
    resolved_count: int
    mean_rmse_deg: Optional[float] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("a result row needs at least one trial")
        if not (0 <= self.resolved_count <= self.trials):
            raise ParameterError("resolved_count must lie in [0, trials]")

    @property
    def prob_resolution(self) -> float:
        return self.resolved_count / self.trials

    @classmethod
    def aggregate(cls, method: str, alpha: float, gsnr_db: float, outcomes: List[TrialOutcome]) -> "ResultRow":
        resolved = [o for o in outcomes if o.resolved]
        # resolved-only average; unresolved trials have no matching to score
        mean_rmse = None
        if resolved:
            mean_rmse = float(sum(o.rmse_deg for o in resolved) / len(resolved))
        return cls(
            method=method,
            alpha=float(alpha),
            gsnr_db=float(gsnr_db),
            trials=len(outcomes),
            resolved_count=len(resolved),
            mean_rmse_deg=mean_rmse,
        )

    def to_dict(self) -> Dict[str, Any]:
        # column order is the CSV schema order
        return {
            "method": self.method,
            "alpha": float(self.alpha),
            "gsnr_db": float(self.gsnr_db),
            "trials": int(self.trials),
            "prob_resolution": self.prob_resolution,
            "mean_rmse_deg": self.mean_rmse_deg,
            "resolved_count": int(self.resolved_count),
        }
