# app/services/estimators.py
"""
Scatter matrices computed from snapshot blocks: sample covariance, the
fractional lower-order moment (FLOM) matrix and the spatial sign covariance
(SSCM). No diagonal loading is applied.
"""
from __future__ import annotations

import logging

import numpy as np

from app.core.errors import DegenerateInputError, ParameterError
from app.models.array import SnapshotMatrix
from app.models.scatter import EstimatorKind, ScatterEstimate

logger = logging.getLogger(__name__)


def _snapshots(x: SnapshotMatrix) -> np.ndarray:
    data = x.data
    if data.shape[1] < 1:
        raise DegenerateInputError("estimators need at least one snapshot")
    return data


def _hermitian_part(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + c.conj().T)


def _cross_moment(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(1/n) X Y^H followed by the Hermitian part; shared by sample and FLOM paths."""
    return _hermitian_part(x @ y.conj().T / x.shape[1])


def sample_covariance(x: SnapshotMatrix) -> ScatterEstimate:
    data = _snapshots(x)
    return ScatterEstimate(matrix=_cross_moment(data, data), kind=EstimatorKind.SAMPLE)


def _flom_weighted(data: np.ndarray, p: float) -> np.ndarray:
    """x_k |x_k|^(p-2), with zero entries mapped to zero."""
    mag = np.abs(data)
    if p == 2.0:
        return data * mag ** 0.0
    weight = np.zeros_like(mag)
    nz = mag > 0.0
    weight[nz] = mag[nz] ** (p - 2.0)
    return data * weight


def _check_flom_order(p: float) -> float:
    p = float(p)
    if not (1.0 < p <= 2.0):
        raise ParameterError(f"FLOM order p must lie in (1, 2], got {p}")
    return p


def flom_moments(x: SnapshotMatrix, p: float) -> np.ndarray:
    """Raw elementwise mean of x_i |x_k|^(p-2) x_k^*, before symmetrization."""
    p = _check_flom_order(p)
    data = _snapshots(x)
    return data @ _flom_weighted(data, p).conj().T / data.shape[1]


def flom_matrix(x: SnapshotMatrix, p: float = 1.1) -> ScatterEstimate:
    p = _check_flom_order(p)
    data = _snapshots(x)
    return ScatterEstimate(
        matrix=_cross_moment(data, _flom_weighted(data, p)),
        kind=EstimatorKind.FLOM,
        flom_order=p,
    )


def sscm(x: SnapshotMatrix) -> ScatterEstimate:
    data = _snapshots(x)
    norms = np.linalg.norm(data, axis=0)
    keep = norms > 0.0
    if not keep.any():
        raise DegenerateInputError("SSCM is undefined when every snapshot is zero")
    if not keep.all():
        logger.warning("SSCM: dropping %d all-zero snapshot(s)", int((~keep).sum()))
    signs = data[:, keep] / norms[keep]
    return ScatterEstimate(matrix=_cross_moment(signs, signs), kind=EstimatorKind.SSCM)


def estimate(x: SnapshotMatrix, kind: EstimatorKind, flom_p: float = 1.1) -> ScatterEstimate:
    kind = EstimatorKind(kind)
    if kind == EstimatorKind.SAMPLE:
        return sample_covariance(x)
    if kind == EstimatorKind.FLOM:
        return flom_matrix(x, flom_p)
    return sscm(x)
