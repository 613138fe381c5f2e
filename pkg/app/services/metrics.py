# app/services/metrics.py
from __future__ import annotations

import math
from typing import List, Optional, Sequence

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from app.core.errors import ContractViolation, ParameterError
from app.models.outcome import TrialOutcome
from app.models.spectrum import Spectrum

DEFAULT_TOL_DEG = 2.0


def find_peaks(s: Spectrum, k: int) -> List[float]:
    """
    Up to k interior local maxima of the spectrum, strongest first, returned in
    ascending angle order. Endpoints never qualify; a flat-topped peak is
    reported at its leftmost grid index.
    """
    k = int(k)
    if k < 1:
        raise ParameterError(f"peak count must be >= 1, got {k}")
    values = np.asarray(s.values_db, dtype=float)
    _, props = _scipy_find_peaks(values, plateau_size=1)
    idx = np.asarray(props["left_edges"], dtype=int)
    if idx.size == 0:
        return []
    strongest = idx[np.argsort(-values[idx], kind="stable")][:k]
    return [float(t) for t in np.sort(s.grid[strongest])]


def resolution_success(peaks: Sequence[float], truth: Sequence[float], tol_deg: float = DEFAULT_TOL_DEG) -> bool:
    """A scene without sources has nothing to resolve and never counts as resolved."""
    if not float(tol_deg) > 0.0:
        raise ParameterError(f"tolerance must be > 0, got {tol_deg}")
    if len(truth) == 0 or len(peaks) != len(truth):
        return False
    # order-preserving one-to-one matching
    return all(abs(p - t) <= float(tol_deg) for p, t in zip(sorted(peaks), sorted(truth)))


def rmse_deg(peaks: Sequence[float], truth: Sequence[float], tol_deg: Optional[float] = None) -> float:
    """
    Root-mean-square angular error over the order-matched pairs. Only defined for
    resolved trials; `tol_deg`, when given, re-checks that precondition.
    """
    if len(peaks) != len(truth) or len(truth) == 0:
        raise ContractViolation("RMSE needs a one-to-one matching of peaks to true DOAs")
    if tol_deg is not None and not resolution_success(peaks, truth, tol_deg):
        raise ContractViolation("RMSE requested for an unresolved trial")
    err = np.asarray(sorted(peaks), dtype=float) - np.asarray(sorted(truth), dtype=float)
    return float(math.sqrt(np.mean(err ** 2)))


def score_trial(s: Spectrum, truth: Sequence[float], tol_deg: float = DEFAULT_TOL_DEG) -> TrialOutcome:
    truth = [float(t) for t in truth]
    peaks = find_peaks(s, len(truth)) if truth else []
    if resolution_success(peaks, truth, tol_deg):
        return TrialOutcome(estimated_doas=peaks, resolved=True, rmse_deg=rmse_deg(peaks, truth))
    return TrialOutcome(estimated_doas=peaks, resolved=False, rmse_deg=None)
