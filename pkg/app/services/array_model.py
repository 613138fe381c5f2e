# app/services/array_model.py
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from app.core.errors import ParameterError
from app.models.array import ArrayGeometry, SnapshotMatrix, SourceScene
from app.models.noise import NoiseParams
from app.services.noise import sample_complex_isotropic_sas


def _check_angles(theta_deg: np.ndarray) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta_deg, dtype=float))
    if np.any(theta < 0.0) or np.any(theta > 180.0) or not np.all(np.isfinite(theta)):
        raise ParameterError("steering angles must lie in [0, 180] degrees")
    return theta


def steering_matrix(geom: ArrayGeometry, thetas_deg: Sequence[float]) -> np.ndarray:
    """
    Unit-norm ULA steering vectors as columns (M x len(thetas)). Angles are
    measured from the array axis; entry m is exp(j pi spacing m cos theta) / sqrt(M).
    """
    theta = _check_angles(thetas_deg)
    m_idx = np.arange(int(geom.m))[:, None]
    phase = np.pi * float(geom.spacing) * m_idx * np.cos(np.deg2rad(theta))[None, :]
    return np.exp(1j * phase) / np.sqrt(int(geom.m))


def steering_vector(geom: ArrayGeometry, theta: float) -> np.ndarray:
    return steering_matrix(geom, [theta])[:, 0]


def scan_grid(step: float = 0.5, margin: float = 0.5) -> np.ndarray:
    """Uniform scan grid over (0, 180) with the endfire endpoints trimmed by `margin` degrees."""
    step = float(step)
    margin = float(margin)
    if not step > 0.0:
        raise ParameterError(f"grid step must be > 0, got {step}")
    if not (0.0 <= margin < 90.0):
        raise ParameterError(f"grid margin must lie in [0, 90), got {margin}")
    count = int(np.floor((180.0 - 2.0 * margin) / step + 1e-9)) + 1
    return margin + step * np.arange(count)


def synthesize_snapshots(
    geom: ArrayGeometry,
    scene: SourceScene,
    n: int,
    noise: Optional[NoiseParams],
    rng: np.random.Generator,
) -> SnapshotMatrix:
    """
    X = A(doas) S + V. Source waveforms are independent circular complex Gaussian
    with the scene powers; V is complex isotropic SaS noise, or absent when
    `noise` is None.
    """
    n = int(n)
    if n < 1:
        raise ParameterError(f"snapshot count must be >= 1, got {n}")
    m = int(geom.m)
    data = np.zeros((m, n), dtype=complex)
    if scene.k:
        a = steering_matrix(geom, scene.doas)
        if a.shape != (m, scene.k):
            raise ParameterError("scene and geometry do not agree")
        amp = np.sqrt(scene.power_vector() / 2.0)[:, None]
        s = amp * (rng.standard_normal((scene.k, n)) + 1j * rng.standard_normal((scene.k, n)))
        data += a @ s
    if noise is not None:
        data += sample_complex_isotropic_sas(noise, m * n, rng).reshape(m, n)
    return SnapshotMatrix(data=data)
