# app/services/harness.py
"""
Experiment runners behind the CLI and HTTP surfaces.

Each runner takes a validated ExperimentConfig, computes in memory and returns a
result object holding the tables it produced; `persist` hands those tables to
a ResultStore. All randomness flows from master_seed through
app.core.rng, so identical configs give byte-identical tables.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from app.api.schemas.experiment import ExperimentConfig, Method
from app.core.errors import ParameterError
from app.core.rng import make_rng, trial_rng
from app.models.array import ArrayGeometry, SnapshotMatrix, SourceScene
from app.models.noise import NoiseParams
from app.models.outcome import ResultRow, TrialOutcome
from app.models.scatter import EstimatorKind, ScatterEstimate
from app.models.spectrum import Spectrum
from app.services.array_model import scan_grid, steering_matrix, synthesize_snapshots
from app.services.estimators import estimate
from app.services.metrics import score_trial
from app.services.noise import (
    complex_marginal_dispersion,
    empirical_cf,
    gamma_for_gsnr,
    sample_complex_isotropic_sas,
    sample_real_sas,
    sas_cf,
)
from app.services.spectral import (
    BetaMode,
    compute_spectrum,
    constraint_axes,
    distance_parameter,
    fixed_beta,
    g_function,
    hermitian_eig,
    music_like,
)
from app.storage import ResultStore

logger = logging.getLogger(__name__)

RMSE_CONVENTION = "mean_rmse_deg averages per-trial RMSE over resolved trials only"
GSNR_REFERENCE = "gsnr_db = 10 log10(mean E|s|^2 / gamma^alpha) with unit-norm steering; per-sensor SNR is gsnr_db - 10 log10(M)"
TRIAL_SEED_KEY = "trial data seeded by (master_seed, alpha, gsnr_db, trial); methods share each trial's data"
SPECTRUM_COLUMNS = ["angle_deg", "value_db", "beta"]
SWEEP_COLUMNS = ["method", "alpha", "gsnr_db", "trials", "prob_resolution", "mean_rmse_deg", "resolved_count"]
BETA_TRACE_COLUMNS = ["angle_deg", "beta_theta", "beta_fixed", "g_theta", "xi_theta"]
BETA_GSNR_COLUMNS = [
    "gsnr_db", "beta_min", "beta_max", "xi", "beta_fixed", "fallback",
    "lambda_max", "lambda_min", "lambda_ratio", "b_principal", "b_minor",
]
ECF_COLUMNS = ["t", "ecf_abs", "theory", "abs_error"]
MIN_ECF_SAMPLES = 1000
ECF_BAND_FACTOR = 4.0
NOISE_PREVIEW = 200


def noise_for(alpha: float, gsnr_db: float, scene: SourceScene) -> NoiseParams:
    """
    Noise law for one sweep point. GSNR is E|s|^2 / gamma^alpha with E|s|^2 the mean
    source power. Steering vectors are unit-norm, so each sensor sees a source at
    GSNR - 10 log10(M).
    """
    powers = scene.power_vector()
    signal_power = float(powers.mean()) if powers.size else 1.0
    return NoiseParams(alpha=alpha, gamma=gamma_for_gsnr(signal_power, gsnr_db, alpha))


@dataclass
class _Setup:
    geom: ArrayGeometry
    scene: SourceScene
    grid: np.ndarray


def _setup(config: ExperimentConfig) -> _Setup:
    return _Setup(
        geom=config.geometry.to_geometry(),
        scene=config.scene.to_scene(),
        grid=scan_grid(config.geometry.grid_step, config.geometry.grid_margin),
    )


def _estimates_for(config: ExperimentConfig, x: SnapshotMatrix) -> Dict[EstimatorKind, ScatterEstimate]:
    needed = {m.estimator(config.estimator.kind) for m in config.methods}
    return {kind: estimate(x, kind, config.estimator.flom_p) for kind in sorted(needed, key=lambda k: k.value)}


def _method_spectra(config: ExperimentConfig, setup: _Setup, x: SnapshotMatrix) -> Dict[Method, Spectrum]:
    estimates = _estimates_for(config, x)
    out: Dict[Method, Spectrum] = {}
    for method in config.methods:
        r = estimates[method.estimator(config.estimator.kind)]
        out[method] = compute_spectrum(method.spectrum_method, r, setup.grid, setup.geom, config.k)
    return out


# --- spectrum -------------------------------------------------------------

@dataclass
class SpectrumRun:
    alpha: float
    gsnr_db: float
    noise: NoiseParams
    spectra: Dict[Method, Spectrum] = field(default_factory=dict)

    def tables(self) -> Dict[str, List[Dict[str, Any]]]:
        return {f"spectrum_{m.value}.csv": s.to_rows() for m, s in self.spectra.items()}

    def manifest_extra(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "gsnr_db": self.gsnr_db, "noise": self.noise.to_dict()}


def run_spectrum(config: ExperimentConfig) -> SpectrumRun:
    """One synthesized data block at the first (alpha, GSNR) point, one spectrum per method."""
    setup = _setup(config)
    alpha = config.noise.alphas[0]
    gsnr = config.noise.gsnr_db[0]
    rng = trial_rng(config.master_seed, alpha, gsnr, 0)
    noise = noise_for(alpha, gsnr, setup.scene)
    x = synthesize_snapshots(setup.geom, setup.scene, config.snapshots, noise, rng)
    return SpectrumRun(alpha=alpha, gsnr_db=gsnr, noise=noise, spectra=_method_spectra(config, setup, x))


# --- Monte Carlo sweep ----------------------------------------------------

def run_trial(config: ExperimentConfig, setup: _Setup, alpha: float, gsnr_db: float, trial_index: int) -> Dict[Method, TrialOutcome]:
    """Score every method on the same synthesized block; the block depends only on the seed key."""
    rng = trial_rng(config.master_seed, alpha, gsnr_db, trial_index)
    x = synthesize_snapshots(setup.geom, setup.scene, config.snapshots, noise_for(alpha, gsnr_db, setup.scene), rng)
    spectra = _method_spectra(config, setup, x)
    return {m: score_trial(s, setup.scene.doas, config.tol_deg) for m, s in spectra.items()}


@dataclass
class SweepRun:
    rows: List[ResultRow] = field(default_factory=list)

    def tables(self) -> Dict[str, List[Dict[str, Any]]]:
        return {"sweep.csv": [r.to_dict() for r in self.rows]}

    def curves(self) -> Dict[str, List[Dict[str, Any]]]:
        """One prob-resolution and one RMSE curve file per alpha, methods as columns."""
        out: Dict[str, List[Dict[str, Any]]] = {}
        alphas = sorted({r.alpha for r in self.rows}, reverse=True)
        for alpha in alphas:
            rows = [r for r in self.rows if r.alpha == alpha]
            gsnrs = list(dict.fromkeys(r.gsnr_db for r in rows))
            methods = list(dict.fromkeys(r.method for r in rows))
            prob, rmse = [], []
            for g in gsnrs:
                at = {r.method: r for r in rows if r.gsnr_db == g}
                prob.append({"gsnr_db": g, **{m: at[m].prob_resolution for m in methods}})
                rmse.append({"gsnr_db": g, **{m: at[m].mean_rmse_deg for m in methods}})
            out[f"prob_resolution_alpha{alpha:g}.csv"] = prob
            out[f"rmse_alpha{alpha:g}.csv"] = rmse
        return out


def run_mc_sweep(config: ExperimentConfig, threads: int = 1) -> SweepRun:
    setup = _setup(config)
    threads = max(int(threads), 1)
    rows: List[ResultRow] = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for alpha in config.noise.alphas:
            for gsnr in config.noise.gsnr_db:
                logger.debug("sweep point alpha=%g gsnr=%g dB (%d trials)", alpha, gsnr, config.trials)
                # map preserves trial order, so aggregation is independent of scheduling
                results = list(pool.map(lambda i: run_trial(config, setup, alpha, gsnr, i), range(config.trials)))
                for method in config.methods:
                    rows.append(ResultRow.aggregate(method.value, alpha, gsnr, [r[method] for r in results]))
    return SweepRun(rows=rows)


# --- beta trace -----------------------------------------------------------

@dataclass
class BetaTraceRun:
    trace: List[Dict[str, Any]] = field(default_factory=list)
    bounds: Dict[str, Any] = field(default_factory=dict)
    by_gsnr: List[Dict[str, Any]] = field(default_factory=list)

    def tables(self) -> Dict[str, List[Dict[str, Any]]]:
        out = {"beta_trace.csv": self.trace}
        if self.by_gsnr:
            out["beta_vs_gsnr.csv"] = self.by_gsnr
        return out


def _beta_point(config: ExperimentConfig, setup: _Setup, alpha: float, gsnr: float):
    rng = trial_rng(config.master_seed, alpha, gsnr, 0)
    x = synthesize_snapshots(setup.geom, setup.scene, config.snapshots, noise_for(alpha, gsnr, setup.scene), rng)
    r = estimate(x, config.estimator.kind, config.estimator.flom_p)
    result = music_like(r, setup.grid, setup.geom, config.k, beta_mode=BetaMode.DIRECTIONAL)
    return r, result


def run_beta_trace(config: ExperimentConfig) -> BetaTraceRun:
    """
    Directional beta against the fixed beta and g(theta) at the first sweep point;
    with several GSNR values, also the bounds and fixed beta per GSNR.
    """
    setup = _setup(config)
    alpha = config.noise.alphas[0]
    gsnr = config.noise.gsnr_db[0]
    r, result = _beta_point(config, setup, alpha, gsnr)
    eig = hermitian_eig(r)
    a = steering_matrix(setup.geom, setup.grid)
    g = g_function(eig, a)
    beta_fixed = fixed_beta(result.bounds)
    beta_theta = result.spectrum.beta_trace
    xi_theta = distance_parameter(eig, a)
    trace = [
        {"angle_deg": float(t), "beta_theta": float(b), "beta_fixed": beta_fixed, "g_theta": float(gv), "xi_theta": float(xv)}
        for t, b, gv, xv in zip(setup.grid, beta_theta, g, xi_theta)
    ]

    by_gsnr: List[Dict[str, Any]] = []
    if len(config.noise.gsnr_db) > 1:
        for point in config.noise.gsnr_db:
            r_p, res_p = _beta_point(config, setup, alpha, point)
            b = res_p.bounds
            beta_p = fixed_beta(b)
            ref = steering_matrix(setup.geom, [setup.scene.doas[0]])[:, 0] if setup.scene.k else a[:, 0]
            axes = constraint_axes(r_p, ref, beta_p)
            by_gsnr.append({
                "gsnr_db": float(point),
                "beta_min": b.beta_min,
                "beta_max": b.beta_max,
                "xi": b.xi,
                "beta_fixed": beta_p,
                "fallback": b.fallback,
                "lambda_max": axes["r_principal"],
                "lambda_min": axes["r_minor"],
                "lambda_ratio": axes["r_ratio"],
                "b_principal": axes["b_principal"],
                "b_minor": axes["b_minor"],
            })
    return BetaTraceRun(trace=trace, bounds=result.bounds.to_dict(), by_gsnr=by_gsnr)


# --- noise validation -----------------------------------------------------

@dataclass
class NoiseValidateRun:
    ecf: List[Dict[str, Any]] = field(default_factory=list)
    preview: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def tables(self) -> Dict[str, List[Dict[str, Any]]]:
        return {"noise_ecf.csv": self.ecf, "noise_samples.csv": self.preview}


def ecf_grid(alpha: float, dispersion: float) -> np.ndarray:
    """Five t values where the theoretical CF spans roughly 0.9 down to 0.1."""
    levels = np.array([0.1, 0.3, 0.7, 1.2, 2.0])
    return (levels / float(dispersion)) ** (1.0 / float(alpha))


def run_noise_validate(alpha: float, gamma: float, n: int, seed: int, kind: str = "complex") -> NoiseValidateRun:
    """
    ECF check of the sampler against its characteristic function. For complex
    noise the real part is checked against the marginal dispersion (gamma/2)^alpha.
    """
    params = NoiseParams(alpha=alpha, gamma=gamma)
    rng = make_rng(seed)
    if kind == "real":
        samples = sample_real_sas(params, n, rng)
        dispersion = float(gamma)
    elif kind == "complex":
        samples = np.real(sample_complex_isotropic_sas(params, n, rng))
        dispersion = complex_marginal_dispersion(params)
    else:
        raise ParameterError(f"unknown noise kind {kind!r}; expected real or complex")

    t = ecf_grid(alpha, dispersion)
    ecf = empirical_cf(samples, t) if n else np.zeros(t.size, dtype=complex)
    theory = sas_cf(t, alpha, dispersion)
    err = np.abs(ecf - theory)
    band = ECF_BAND_FACTOR / np.sqrt(n) if n else float("inf")

    checked = n >= MIN_ECF_SAMPLES
    if not checked:
        logger.warning("noise-validate: n=%d is below %d samples, confidence-band check skipped", n, MIN_ECF_SAMPLES)
    rows = [
        {"t": float(tv), "ecf_abs": float(abs(e)), "theory": float(th), "abs_error": float(er)}
        for tv, e, th, er in zip(t, ecf, theory, err)
    ]
    preview = [{"index": i, "real_part": float(v)} for i, v in enumerate(samples[:NOISE_PREVIEW])]
    summary = {
        "alpha": float(alpha),
        "gamma": float(gamma),
        "kind": kind,
        "n": int(n),
        "dispersion": dispersion,
        "band": float(band),
        "max_abs_error": float(err.max()) if err.size else 0.0,
        "band_checked": checked,
        "passed": bool(checked and np.all(err <= band)),
        "max_abs_sample": float(np.max(np.abs(samples))) if n else 0.0,
    }
    return NoiseValidateRun(ecf=rows, preview=preview, summary=summary)


# --- persistence ----------------------------------------------------------

_COLUMNS = {
    "sweep.csv": SWEEP_COLUMNS,
    "beta_trace.csv": BETA_TRACE_COLUMNS,
    "beta_vs_gsnr.csv": BETA_GSNR_COLUMNS,
    "noise_ecf.csv": ECF_COLUMNS,
    "noise_samples.csv": ["index", "real_part"],
}


def _columns_for(name: str) -> Optional[List[str]]:
    if name.startswith("spectrum_"):
        return SPECTRUM_COLUMNS
    return _COLUMNS.get(name)


def persist(store: ResultStore, command: str, tables: Dict[str, List[Dict[str, Any]]], config: Dict[str, Any],
            seed: int, started: float, extra: Optional[Dict[str, Any]] = None) -> List[str]:
    written = []
    for name, rows in tables.items():
        store.write_table(name, rows, _columns_for(name))
        written.append(name)
    meta = {"rmse_convention": RMSE_CONVENTION, "gsnr_reference": GSNR_REFERENCE, "trial_seed_key": TRIAL_SEED_KEY}
    if extra:
        meta.update(extra)
    store.write_manifest(command, config, seed, time.perf_counter() - started, written, extra=meta)
    logger.info("%s: wrote %d table(s) to %s", command, len(written), store.run_dir)
    return written
