# app/services/noise.py
"""
Symmetric alpha-stable noise generation and GSNR calibration.

Real samples follow the characteristic function exp(-gamma |t|^alpha) exactly as
written (gamma enters linearly). They are drawn with the Chambers-Mallows-Stuck
transform of a uniform angle and a unit exponential.

Complex isotropic samples use the sub-Gaussian construction

    v = sqrt(A) * (g1 + j g2),   g1, g2 ~ N(0, gamma^2 / 2),

where A is a positive (alpha/2)-stable variate with Laplace transform
E[exp(-s A)] = exp(-s^(alpha/2)) (A = 1 when alpha = 2). Each real marginal then
has characteristic function exp(-(gamma/2)^alpha |t|^alpha), i.e. marginal
dispersion gamma_r = (gamma/2)^alpha, and at alpha = 2 the noise power is
E|v|^2 = gamma^2. That keeps GSNR = E|s|^2 / gamma^alpha an ordinary SNR in the
Gaussian case.
"""
from __future__ import annotations

import math

import numpy as np

from app.core.errors import ParameterError
from app.models.noise import NoiseParams


def _check_count(n: int) -> int:
    n = int(n)
    if n < 0:
        raise ParameterError(f"sample count must be >= 0, got {n}")
    return n


def _standard_symmetric_stable(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Samples with characteristic function exp(-|t|^alpha)."""
    phi = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size=n)
    if alpha == 1.0:
        return np.tan(phi)
    w = rng.standard_exponential(size=n)
    if alpha == 2.0:
        return 2.0 * np.sqrt(w) * np.sin(phi)
    return (
        np.sin(alpha * phi) / np.cos(phi) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha)
    )


def _positive_stable(a: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Totally skewed positive stable variates with index 0 < a < 1 and Laplace
    transform exp(-s^a) (Kanter's representation).
    """
    u = rng.uniform(0.0, np.pi, size=n)
    w = rng.standard_exponential(size=n)
    return np.sin(a * u) / np.sin(u) ** (1.0 / a) * (np.sin((1.0 - a) * u) / w) ** ((1.0 - a) / a)


def sample_real_sas(params: NoiseParams, n: int, rng: np.random.Generator) -> np.ndarray:
    n = _check_count(n)
    if n == 0:
        return np.empty(0, dtype=float)
    alpha = float(params.alpha)
    scale = float(params.gamma) ** (1.0 / alpha)
    return scale * _standard_symmetric_stable(alpha, n, rng)


def complex_marginal_dispersion(params: NoiseParams) -> float:
    """Dispersion gamma_r of each real marginal of complex isotropic noise."""
    return (float(params.gamma) / 2.0) ** float(params.alpha)


def sample_complex_isotropic_sas(params: NoiseParams, n: int, rng: np.random.Generator) -> np.ndarray:
    n = _check_count(n)
    if n == 0:
        return np.empty(0, dtype=complex)
    alpha = float(params.alpha)
    sigma = float(params.gamma) / math.sqrt(2.0)
    g = rng.standard_normal(size=(2, n)) * sigma
    if alpha == 2.0:
        return g[0] + 1j * g[1]
    mix = np.sqrt(_positive_stable(alpha / 2.0, n, rng))
    return mix * (g[0] + 1j * g[1])


def gamma_for_gsnr(signal_power: float, gsnr_db: float, alpha: float) -> float:
    """Invert GSNR(dB) = 10 log10(signal_power / gamma^alpha) for gamma."""
    if not float(signal_power) > 0.0:
        raise ParameterError(f"signal_power must be > 0, got {signal_power}")
    if not (0.0 < float(alpha) <= 2.0):
        raise ParameterError(f"alpha must be in (0, 2], got {alpha}")
    return (float(signal_power) / 10.0 ** (float(gsnr_db) / 10.0)) ** (1.0 / float(alpha))


def gsnr_of_gamma(signal_power: float, gamma: float, alpha: float) -> float:
    if not float(signal_power) > 0.0:
        raise ParameterError(f"signal_power must be > 0, got {signal_power}")
    if not float(gamma) > 0.0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    return 10.0 * math.log10(float(signal_power) / float(gamma) ** float(alpha))


def empirical_cf(samples: np.ndarray, t: np.ndarray) -> np.ndarray:
    """(1/n) sum exp(j t x_i) for each t."""
    x = np.asarray(samples, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(1j * np.outer(t, x)).mean(axis=1)


def sas_cf(t: np.ndarray, alpha: float, dispersion: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.exp(-float(dispersion) * np.abs(t) ** float(alpha))
