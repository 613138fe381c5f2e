# app/api/schemas/experiment.py
from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.errors import ConfigError
from app.models.array import ArrayGeometry, SourceScene
from app.models.scatter import EstimatorKind
from app.models.spectrum import SpectrumMethod


class Method(str, Enum):
    """Methods a run can score. FLOM-MUSIC and SSCM-MUSIC are MUSIC on their own estimator."""
    CAPON = "capon"
    MUSIC = "music"
    FLOM_MUSIC = "flom_music"
    SSCM_MUSIC = "sscm_music"
    MUSIC_LIKE_FIXED = "music_like_fixed"
    MUSIC_LIKE_ADAPTIVE = "music_like_adaptive"

    @property
    def spectrum_method(self) -> SpectrumMethod:
        if self in (Method.FLOM_MUSIC, Method.SSCM_MUSIC):
            return SpectrumMethod.MUSIC
        return SpectrumMethod(self.value)

    def estimator(self, default: EstimatorKind) -> EstimatorKind:
        if self == Method.FLOM_MUSIC:
            return EstimatorKind.FLOM
        if self == Method.SSCM_MUSIC:
            return EstimatorKind.SSCM
        return default


class GeometrySection(BaseModel):
    sensors: int = Field(10, ge=2, description="Number of ULA sensors M")
    spacing: float = Field(1.0, gt=0.0, description="Sensor spacing in half-wavelengths")
    grid_step: float = Field(0.5, gt=0.0, le=10.0, description="Scan grid step in degrees")
    grid_margin: float = Field(0.5, ge=0.0, lt=90.0, description="Degrees trimmed from each endfire end")

    def to_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(m=self.sensors, spacing=self.spacing)


class SceneSection(BaseModel):
    doas: List[float] = Field(default_factory=lambda: [50.0, 60.0, 110.0], description="Source DOAs in degrees, (0, 180)")
    powers: Optional[List[float]] = Field(None, description="Per-source E|s|^2; unit power when omitted")

    @field_validator("doas")
    def _check_doas(cls, v):
        for d in v:
            if not (0.0 < d < 180.0):
                raise ValueError(f"DOA {d} is outside (0, 180)")
        if len(set(v)) != len(v):
            raise ValueError("DOAs must be pairwise distinct")
        return v

    @model_validator(mode="after")
    def _check_powers(self):
        if self.powers is not None:
            if len(self.powers) != len(self.doas):
                raise ValueError("powers must have one entry per DOA")
            if any(p <= 0.0 for p in self.powers):
                raise ValueError("powers must be > 0")
        return self

    def to_scene(self) -> SourceScene:
        return SourceScene(doas=list(self.doas), powers=None if self.powers is None else list(self.powers))


class NoiseSection(BaseModel):
    alphas: List[float] = Field(default_factory=lambda: [1.8], min_length=1, description="Characteristic exponents")
    gsnr_db: List[float] = Field(default_factory=lambda: [-2.0], min_length=1, description="GSNR values in dB")

    @field_validator("alphas")
    def _check_alphas(cls, v):
        for a in v:
            if not (0.0 < a <= 2.0):
                raise ValueError(f"alpha {a} is outside (0, 2]")
        return v


class EstimatorSection(BaseModel):
    kind: EstimatorKind = Field(EstimatorKind.SAMPLE, description="Estimator behind capon/music/music_like methods")
    flom_p: float = Field(1.1, gt=1.0, le=2.0, description="FLOM order p")


class ExperimentConfig(BaseModel):
    """
    One experiment document. Mirrors the YAML layout shipped under configs/.
    """
    geometry: GeometrySection = Field(default_factory=GeometrySection)
    scene: SceneSection = Field(default_factory=SceneSection)
    snapshots: int = Field(100, ge=1)
    noise: NoiseSection = Field(default_factory=NoiseSection)
    estimator: EstimatorSection = Field(default_factory=EstimatorSection)
    methods: List[Method] = Field(
        default_factory=lambda: [
            Method.MUSIC,
            Method.FLOM_MUSIC,
            Method.SSCM_MUSIC,
            Method.MUSIC_LIKE_FIXED,
            Method.MUSIC_LIKE_ADAPTIVE,
        ],
        min_length=1,
    )
    assumed_k: Optional[int] = Field(None, ge=0, description="Source count assumed by MUSIC and the beta bounds; defaults to the true K")
    trials: int = Field(200, ge=1)
    tol_deg: float = Field(2.0, gt=0.0)
    master_seed: int = Field(20240601, ge=0)

    model_config = ConfigDict(extra="forbid")

    @field_validator("methods")
    def _unique_methods(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("methods must not repeat")
        return v

    @model_validator(mode="after")
    def _check_k(self):
        if self.k >= self.geometry.sensors:
            raise ValueError(f"assumed_k ({self.k}) must be smaller than the sensor count ({self.geometry.sensors})")
        return self

    @property
    def k(self) -> int:
        return len(self.scene.doas) if self.assumed_k is None else int(self.assumed_k)

    def with_overrides(
        self,
        seed: Optional[int] = None,
        trials: Optional[int] = None,
        alphas: Optional[List[float]] = None,
        gsnrs: Optional[List[float]] = None,
    ) -> "ExperimentConfig":
        data = self.model_dump(mode="json")
        if seed is not None:
            data["master_seed"] = seed
        if trials is not None:
            data["trials"] = trials
        if alphas:
            data["noise"]["alphas"] = list(alphas)
        if gsnrs:
            data["noise"]["gsnr_db"] = list(gsnrs)
        return parse_config(data)


def _format_validation_error(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e.get("loc", ())) or "<root>"
        lines.append(f"{loc}: {e.get('msg')}")
    return "invalid experiment config:\n  " + "\n  ".join(lines)


def parse_config(data: Optional[Dict[str, Any]]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data or {})
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a mapping at the top level")
    return parse_config(data)


class NoiseValidateRequest(BaseModel):
    alpha: float = Field(..., gt=0.0, le=2.0)
    gamma: float = Field(..., gt=0.0)
    n: int = Field(100_000, ge=1)
    seed: int = Field(20240601, ge=0)
    kind: str = Field("complex", pattern="^(real|complex)$")
    persist: bool = Field(False, description="Also write CSV/JSON files under the output directory")


class RunRequest(BaseModel):
    config: ExperimentConfig = Field(default_factory=ExperimentConfig)
    threads: int = Field(1, ge=1, le=64, description="Worker threads for mc-sweep")
    persist: bool = Field(False, description="Also write CSV/JSON files under the output directory")


class ResultRowOut(BaseModel):
    method: str
    alpha: float
    gsnr_db: float
    trials: int
    prob_resolution: float
    mean_rmse_deg: Optional[float] = None
    resolved_count: int
