# app/services/spectral.py
"""
Spatial spectra over a scan grid: Capon, MUSIC and the MUSIC-like family with a
fixed or a direction-dependent relaxation parameter.

MUSIC-like weights solve, per look direction, the pencil

    R w = lambda (a a^H + beta I) w

for its smallest eigenvalue. B = a a^H + beta I is a rank-one update of a scaled
identity, so B^(-1/2) = c0 I + c1 a a^H in closed form and the pencil reduces to
the standard Hermitian problem C y = lambda y with C = B^(-1/2) R B^(-1/2),
w = B^(-1/2) y. Building C costs O(M^2) per direction; the grid is solved as one
stacked eigh call.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from app.core.errors import NotHermitianError, ParameterError, SingularMatrixError
from app.models.array import ArrayGeometry
from app.models.scatter import ScatterEstimate
from app.models.spectrum import BetaBounds, EigenDecomposition, Spectrum, SpectrumMethod
from app.services.array_model import steering_matrix

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
SINGULAR_RATIO = 1e-12
DB_CAP = 140.0
COLLAPSE_FACTOR = 0.9


class BetaMode(str, Enum):
    FIXED = "fixed"
    DIRECTIONAL = "directional"


ScatterLike = Union[ScatterEstimate, np.ndarray]


def _matrix(r: ScatterLike) -> np.ndarray:
    if isinstance(r, ScatterEstimate):
        return r.matrix
    return np.asarray(r, dtype=complex)


def _phase_normalize(v: np.ndarray) -> np.ndarray:
    """Rotate each column (last axis = entries) so its largest-magnitude entry is real-positive."""
    idx = np.argmax(np.abs(v), axis=-2)
    pivot = np.take_along_axis(v, idx[..., None, :], axis=-2)
    mag = np.abs(pivot)
    phase = np.where(mag > 0.0, pivot / np.where(mag > 0.0, mag, 1.0), 1.0)
    return v * phase.conj()


def _to_db(denominator: np.ndarray) -> np.ndarray:
    """10 log10(1/d), capped at DB_CAP where d underflows."""
    floor = 10.0 ** (-DB_CAP / 10.0)
    return -10.0 * np.log10(np.maximum(np.real(denominator), floor))


def hermitian_eig(r: ScatterLike) -> EigenDecomposition:
    mat = _matrix(r)
    scale = max(np.linalg.norm(mat), 1.0)
    if np.linalg.norm(mat - mat.conj().T) > HERMITIAN_TOL * scale:
        raise NotHermitianError("eigendecomposition needs a Hermitian matrix")
    vals, vecs = np.linalg.eigh(mat)
    order = np.arange(vals.size)[::-1]
    return EigenDecomposition(eigenvalues=vals[order], eigenvectors=_phase_normalize(vecs[:, order]))


def _check_invertible(eig: EigenDecomposition) -> None:
    lmax = eig.lambda_max
    lmin = eig.lambda_min
    if not (lmax > 0.0 and lmin > SINGULAR_RATIO * lmax):
        raise SingularMatrixError(f"lambda_min={lmin:.3e}, lambda_max={lmax:.3e}")


def _quadratic_inverse(eig: EigenDecomposition, a: np.ndarray) -> np.ndarray:
    """a^H R^-1 a for every column of `a`, through the eigenbasis."""
    b = eig.eigenvectors.conj().T @ a
    return np.real(np.sum(np.abs(b) ** 2 / eig.eigenvalues[:, None], axis=0))


def capon_spectrum(r: ScatterLike, grid: np.ndarray, geom: ArrayGeometry) -> Spectrum:
    eig = hermitian_eig(r)
    _check_invertible(eig)
    a = steering_matrix(geom, grid)
    return Spectrum(grid=grid, values_db=_to_db(_quadratic_inverse(eig, a)), method=SpectrumMethod.CAPON)


def music_spectrum(r: ScatterLike, grid: np.ndarray, geom: ArrayGeometry, k: int) -> Spectrum:
    mat = _matrix(r)
    m = mat.shape[0]
    k = int(k)
    if not (0 <= k < m):
        raise ParameterError(f"assumed source count must satisfy 0 <= k < M={m}, got {k}")
    grid = np.asarray(grid, dtype=float)
    if k == 0:
        # noise subspace is the whole space and steering vectors are unit-norm
        return Spectrum(grid=grid, values_db=np.zeros(grid.size), method=SpectrumMethod.MUSIC)
    eig = hermitian_eig(mat)
    un = eig.noise_subspace(k)
    a = steering_matrix(geom, grid)
    denom = np.sum(np.abs(un.conj().T @ a) ** 2, axis=0)
    return Spectrum(grid=grid, values_db=_to_db(denom), method=SpectrumMethod.MUSIC)


def _min_generalized_eigpairs(r: np.ndarray, a: np.ndarray, betas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Smallest eigenpair of R w = lambda (a a^H + beta I) w for each column of `a`
    (M x G) with its own beta. Returns (lambdas[G], W[M x G]) with unit-norm columns.
    """
    m, g = a.shape
    betas = np.broadcast_to(np.asarray(betas, dtype=float), (g,))
    s = np.real(np.sum(np.abs(a) ** 2, axis=0))
    c0 = 1.0 / np.sqrt(betas)
    safe_s = np.where(s > 0.0, s, 1.0)
    c1 = np.where(s > 0.0, (1.0 / np.sqrt(betas + s) - c0) / safe_s, 0.0)

    av = a.T  # G x M
    ra = (r @ a).T  # G x M, rows R a
    ara = np.real(np.einsum("gm,gm->g", av.conj(), ra))
    outer_ra_a = ra[:, :, None] * av.conj()[:, None, :]  # (R a) a^H
    outer_aa = av[:, :, None] * av.conj()[:, None, :]
    c = (
        (c0 ** 2)[:, None, None] * r[None, :, :]
        + (c0 * c1)[:, None, None] * (outer_ra_a + outer_ra_a.conj().transpose(0, 2, 1))
        + (c1 ** 2 * ara)[:, None, None] * outer_aa
    )
    c = 0.5 * (c + c.conj().transpose(0, 2, 1))
    vals, vecs = np.linalg.eigh(c)
    y = vecs[:, :, 0]  # G x M
    ay = np.einsum("gm,gm->g", av.conj(), y)
    w = c0[:, None] * y + (c1 * ay)[:, None] * av
    w = w / np.linalg.norm(w, axis=1, keepdims=True)
    return vals[:, 0], _phase_normalize(w.T)


def min_generalized_eigpair(r: ScatterLike, a: np.ndarray, beta: float) -> Tuple[float, np.ndarray]:
    if not float(beta) > 0.0:
        raise ParameterError(f"relaxation parameter beta must be > 0, got {beta}")
    mat = _matrix(r)
    a = np.asarray(a, dtype=complex).reshape(-1, 1)
    if a.shape[0] != mat.shape[0]:
        raise ParameterError("steering vector length does not match the scatter matrix")
    lam, w = _min_generalized_eigpairs(mat, a, np.array([float(beta)]))
    return float(lam[0]), w[:, 0]


def _local_minima(values: np.ndarray) -> np.ndarray:
    """Interior local minima; plateaus report their leftmost index."""
    _, props = _scipy_find_peaks(-values, plateau_size=1)
    return np.asarray(props["left_edges"], dtype=int)


def g_function(eig: EigenDecomposition, a: np.ndarray) -> np.ndarray:
    """g(theta) = lambda_min * a^H R^-1 a; small at source directions."""
    return eig.lambda_min * _quadratic_inverse(eig, a)


def _candidate_minima(values: np.ndarray) -> np.ndarray:
    """
    Local minima of g: interior ones (plateaus report their leftmost index) plus a
    grid endpoint that lies strictly below its only neighbour.
    """
    idx = list(_local_minima(values))
    if values.size >= 2:
        if values[0] < values[1]:
            idx.append(0)
        if values[-1] < values[-2]:
            idx.append(values.size - 1)
    return np.asarray(sorted(idx), dtype=int)


def _basin(values: np.ndarray, idx: int) -> Tuple[int, int]:
    """Index range climbing from a minimum out to the neighbouring local maxima."""
    lo = hi = int(idx)
    while lo > 0 and values[lo - 1] >= values[lo]:
        lo -= 1
    while hi < values.size - 1 and values[hi + 1] >= values[hi]:
        hi += 1
    return lo, hi


def _bounds_from_g(g: np.ndarray, grid: np.ndarray, k_hat: int) -> BetaBounds:
    minima = _candidate_minima(g)
    picked = minima[np.argsort(g[minima], kind="stable")][: max(int(k_hat), 0)]
    picked = np.sort(picked)

    if picked.size:
        beta_min = float(np.max(g[picked]))
    else:
        beta_min = float(np.min(g))

    # unguarded points lie in basins of unpicked minima, none deeper than beta_min
    guard = np.zeros(g.size, dtype=bool)
    for idx in picked:
        lo, hi = _basin(g, idx)
        guard[lo: hi + 1] = True
    outside = g[~guard]
    beta_max = float(np.min(outside)) if outside.size else float(np.max(g))

    fallback = False
    if beta_min >= beta_max:
        logger.warning(
            "beta bounds collapsed (beta_min=%.6g >= beta_max=%.6g); using beta_min = %.2f * beta_max",
            beta_min, beta_max, COLLAPSE_FACTOR,
        )
        beta_min = COLLAPSE_FACTOR * beta_max
        fallback = True

    return BetaBounds(
        beta_min=beta_min,
        beta_max=beta_max,
        source_set_estimate=[float(t) for t in grid[picked]],
        fallback=fallback,
    )


def beta_bounds(r: ScatterLike, grid: np.ndarray, geom: ArrayGeometry, k_hat: int) -> BetaBounds:
    """
    Relaxation-parameter bounds. The source set is estimated as the k_hat deepest
    local minima of g over the grid; beta_max excludes the whole basin of g around
    each of them, out to the neighbouring local maxima.
    """
    eig = hermitian_eig(r)
    _check_invertible(eig)
    grid = np.asarray(grid, dtype=float)
    g = g_function(eig, steering_matrix(geom, grid))
    return _bounds_from_g(g, grid, k_hat)


def fixed_beta(b: BetaBounds) -> float:
    xi = b.xi
    return float((1.0 - xi) * b.beta_min + xi * b.beta_max)


def anchor_proximity(eig: EigenDecomposition, a: np.ndarray) -> np.ndarray:
    """|u_M^H a(theta)| per column, clipped to [0, 1]."""
    return np.clip(np.abs(eig.u_min.conj() @ a), 0.0, 1.0)


def distance_parameter(eig: EigenDecomposition, a: np.ndarray) -> np.ndarray:
    return 1.0 - anchor_proximity(eig, a)


def directional_beta(r: ScatterLike, b: BetaBounds, grid: np.ndarray, geom: ArrayGeometry) -> np.ndarray:
    eig = hermitian_eig(r)
    proximity = anchor_proximity(eig, steering_matrix(geom, grid))
    return np.clip(b.beta_max - b.delta * proximity, b.beta_min, b.beta_max)


@dataclass
class MusicLikeResult:
    spectrum: Spectrum
    bounds: BetaBounds
    weights: np.ndarray


def music_like(
    r: ScatterLike,
    grid: np.ndarray,
    geom: ArrayGeometry,
    k_hat: int,
    beta_mode: Union[BetaMode, str] = BetaMode.DIRECTIONAL,
    beta: Optional[float] = None,
) -> MusicLikeResult:
    """Full MUSIC-like evaluation; `beta` overrides the fixed value from the bounds."""
    mode = BetaMode(beta_mode)
    mat = _matrix(r)
    grid = np.asarray(grid, dtype=float)
    eig = hermitian_eig(mat)
    _check_invertible(eig)
    a = steering_matrix(geom, grid)
    bounds = _bounds_from_g(g_function(eig, a), grid, k_hat)

    if mode == BetaMode.FIXED:
        value = fixed_beta(bounds) if beta is None else float(beta)
        if not value > 0.0:
            raise ParameterError(f"relaxation parameter beta must be > 0, got {value}")
        betas = np.full(grid.size, value)
        method = SpectrumMethod.MUSIC_LIKE_FIXED
    else:
        betas = np.clip(bounds.beta_max - bounds.delta * anchor_proximity(eig, a), bounds.beta_min, bounds.beta_max)
        method = SpectrumMethod.MUSIC_LIKE_ADAPTIVE

    _, w = _min_generalized_eigpairs(mat, a, betas)
    gain = np.abs(np.einsum("mg,mg->g", w.conj(), a)) ** 2
    spectrum = Spectrum(grid=grid, values_db=_to_db(gain), method=method, beta_trace=betas)
    return MusicLikeResult(spectrum=spectrum, bounds=bounds, weights=w)


def music_like_spectrum(
    r: ScatterLike,
    grid: np.ndarray,
    geom: ArrayGeometry,
    k_hat: int,
    beta_mode: Union[BetaMode, str] = BetaMode.DIRECTIONAL,
    beta: Optional[float] = None,
) -> Spectrum:
    return music_like(r, grid, geom, k_hat, beta_mode=beta_mode, beta=beta).spectrum


def constraint_axes(r: ScatterLike, a: np.ndarray, beta: float) -> Dict[str, float]:
    """
    Axis lengths of the two ellipsoids behind the MUSIC-like constraint: the
    covariance (largest/smallest eigenvalue of R) and a a^H + beta I, whose
    principal axis along a has length beta + ||a||^2 and minor axes beta.
    """
    eig = hermitian_eig(r)
    a = np.asarray(a, dtype=complex)
    return {
        "r_principal": eig.lambda_max,
        "r_minor": eig.lambda_min,
        "r_ratio": eig.lambda_max / eig.lambda_min if eig.lambda_min > 0.0 else float("inf"),
        "b_principal": float(beta) + float(np.real(np.vdot(a, a))),
        "b_minor": float(beta),
    }


def compute_spectrum(
    method: SpectrumMethod,
    r: ScatterLike,
    grid: np.ndarray,
    geom: ArrayGeometry,
    k: int,
) -> Spectrum:
    method = SpectrumMethod(method)
    if method == SpectrumMethod.CAPON:
        return capon_spectrum(r, grid, geom)
    if method == SpectrumMethod.MUSIC:
        return music_spectrum(r, grid, geom, k)
    mode = BetaMode.FIXED if method == SpectrumMethod.MUSIC_LIKE_FIXED else BetaMode.DIRECTIONAL
    return music_like_spectrum(r, grid, geom, k, beta_mode=mode)
