# app/cli.py
"""
Command-line entry point.

    python -m app.cli spectrum --config configs/spectrum_demo.yaml --out results/spectrum_demo
    python -m app.cli mc-sweep --config configs/resolution_sweep.yaml --trials 200 --threads 4
    python -m app.cli noise-validate --alpha 1.7 --gamma 0.5 --n 100000
    python -m app.cli beta-trace --config configs/beta_trace.yaml
"""
from __future__ import annotations

import logging
import time
from functools import wraps
from pathlib import Path
from typing import Optional, Tuple

import click

from app.api.schemas.experiment import ExperimentConfig, load_config, parse_config
from app.config import get_settings
from app.core.errors import DoaLabError
from app.services import harness
from app.storage import ResultStore

logger = logging.getLogger("app.cli")


def _fail_cleanly(fn):
    """Turn lab errors into a one-line CLI failure instead of a traceback."""
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DoaLabError as e:
            raise click.ClickException(str(e)) from e
    return wrapper


def _load(config_path: Optional[Path], seed: Optional[int], trials: Optional[int],
          alphas: Tuple[float, ...] = (), gsnrs: Tuple[float, ...] = ()) -> ExperimentConfig:
    config = load_config(config_path) if config_path else parse_config({})
    return config.with_overrides(seed=seed, trials=trials, alphas=list(alphas), gsnrs=list(gsnrs))


def _store(out: Optional[Path], command: str) -> ResultStore:
    return ResultStore(out if out else get_settings().OUTPUT_DIR / command)


@click.group()
@click.option("--log-level", default=None, help="Override LOG_LEVEL from the environment.")
def cli(log_level: Optional[str]):
    """Direction-of-arrival lab: MUSIC-like spectra under alpha-stable noise."""
    level = (log_level or get_settings().LOG_LEVEL).upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


config_option = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
                             default=None, help="Experiment YAML document.")
seed_option = click.option("--seed", type=click.IntRange(min=0), default=None, help="Override master_seed.")
out_option = click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None,
                          help="Output directory (default OUTPUT_DIR/<command>).")


@cli.command("spectrum")
@config_option
@seed_option
@out_option
@_fail_cleanly
def spectrum_cmd(config_path, seed, out):
    """One spectrum CSV per method at the first (alpha, GSNR) point."""
    started = time.perf_counter()
    config = _load(config_path, seed, None)
    run = harness.run_spectrum(config)
    store = _store(out, "spectrum")
    written = harness.persist(store, "spectrum", run.tables(), config.model_dump(mode="json"), config.master_seed, started,
                              extra=run.manifest_extra())
    click.echo(f"wrote {len(written)} spectrum file(s) to {store.run_dir}")


@cli.command("mc-sweep")
@config_option
@seed_option
@out_option
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Override the trial count.")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads (default THREADS).")
@click.option("--alpha", "alphas", type=float, multiple=True, help="Restrict the sweep to these alphas (repeatable).")
@click.option("--gsnr", "gsnrs", type=float, multiple=True, help="Restrict the sweep to these GSNRs in dB (repeatable).")
@_fail_cleanly
def mc_sweep_cmd(config_path, seed, out, trials, threads, alphas, gsnrs):
    """Monte Carlo probability of resolution and RMSE over the alpha x GSNR grid."""
    started = time.perf_counter()
    config = _load(config_path, seed, trials, alphas, gsnrs)
    threads = threads or get_settings().THREADS
    logger.info("mc-sweep: %d alpha x %d GSNR x %d trials, %d thread(s)",
                len(config.noise.alphas), len(config.noise.gsnr_db), config.trials, threads)
    run = harness.run_mc_sweep(config, threads=threads)
    store = _store(out, "mc-sweep")
    tables = {**run.tables(), **run.curves()}
    harness.persist(store, "mc-sweep", tables, config.model_dump(mode="json"), config.master_seed, started)
    for row in run.rows:
        click.echo(f"{row.method:<22} alpha={row.alpha:<4g} gsnr={row.gsnr_db:>6g} dB  "
                   f"p_res={row.prob_resolution:.3f}  rmse={'-' if row.mean_rmse_deg is None else f'{row.mean_rmse_deg:.3f}'}")


@cli.command("noise-validate")
@click.option("--alpha", type=click.FloatRange(min=0.0, max=2.0, min_open=True), required=True)
@click.option("--gamma", type=click.FloatRange(min=0.0, min_open=True), required=True)
@click.option("--n", "n", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--kind", type=click.Choice(["complex", "real"]), default="complex", show_default=True)
@seed_option
@out_option
@_fail_cleanly
def noise_validate_cmd(alpha, gamma, n, kind, seed, out):
    """Empirical characteristic function of the SaS sampler against theory."""
    started = time.perf_counter()
    seed = get_settings().DEFAULT_SEED if seed is None else seed
    run = harness.run_noise_validate(alpha, gamma, n, seed, kind=kind)
    store = _store(out, "noise-validate")
    harness.persist(store, "noise-validate", run.tables(), {"alpha": alpha, "gamma": gamma, "n": n, "kind": kind},
                    seed, started, extra={"summary": run.summary})
    s = run.summary
    if not s["band_checked"]:
        click.echo(f"band check skipped: n={n} is too small")
    else:
        click.echo(f"{'PASS' if s['passed'] else 'FAIL'}: max |ECF - CF| = {s['max_abs_error']:.4g} (band {s['band']:.4g})")
    click.echo(f"max |sample| = {s['max_abs_sample']:.4g}")


@cli.command("beta-trace")
@config_option
@seed_option
@out_option
@_fail_cleanly
def beta_trace_cmd(config_path, seed, out):
    """Directional beta, fixed beta and g(theta) over the scan grid; beta bounds per GSNR."""
    started = time.perf_counter()
    config = _load(config_path, seed, None)
    run = harness.run_beta_trace(config)
    store = _store(out, "beta-trace")
    harness.persist(store, "beta-trace", run.tables(), config.model_dump(mode="json"), config.master_seed, started,
                    extra={"bounds": run.bounds})
    b = run.bounds
    click.echo(f"beta_min={b['beta_min']:.6g} beta_max={b['beta_max']:.6g} xi={b['xi']:.4g}"
               f"{' (fallback)' if b['fallback'] else ''}")


if __name__ == "__main__":
    cli()
