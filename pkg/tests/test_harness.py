# tests/test_harness.py
import json
import logging

import numpy as np
import pytest

from app.core.errors import ParameterError
from app.core.rng import trial_rng
from app.models.array import SourceScene
from app.services import harness
from app.services.metrics import find_peaks
from app.services.noise import gsnr_of_gamma
from app.storage import MANIFEST_NAME, SCHEMA_HEADER, ResultStore, read_table


def test_noise_is_calibrated_to_mean_source_power():
    scene = SourceScene(doas=[40.0, 100.0], powers=[1.0, 3.0])
    noise = harness.noise_for(1.8, -4.0, scene)
    assert gsnr_of_gamma(2.0, noise.gamma, 1.8) == pytest.approx(-4.0)
    # at alpha = 2 the per-sensor noise power is gamma^2
    gaussian = harness.noise_for(2.0, 0.0, SourceScene(doas=[40.0]))
    assert gaussian.gamma == pytest.approx(1.0)
    assert noise.alpha == 1.8


def test_trial_streams_are_keyed_not_ordered():
    a = trial_rng(7, 1.8, -2.0, 3).standard_normal(4)
    b = trial_rng(7, 1.8, -2.0, 3).standard_normal(4)
    c = trial_rng(7, 1.8, -2.0, 4).standard_normal(4)
    d = trial_rng(7, 1.9, -2.0, 3).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    with pytest.raises(ParameterError):
        trial_rng(7, 1.8, -2.0, -1)


def test_run_spectrum_is_deterministic(small_config):
    cfg = small_config(methods=["capon", "music", "flom_music", "sscm_music", "music_like_fixed", "music_like_adaptive"])
    first = harness.run_spectrum(cfg).tables()
    second = harness.run_spectrum(cfg).tables()
    assert sorted(first) == [
        "spectrum_capon.csv",
        "spectrum_flom_music.csv",
        "spectrum_music.csv",
        "spectrum_music_like_adaptive.csv",
        "spectrum_music_like_fixed.csv",
        "spectrum_sscm_music.csv",
    ]
    assert first == second
    assert first["spectrum_music.csv"][0]["beta"] is None
    assert first["spectrum_music_like_adaptive.csv"][0]["beta"] > 0.0


def test_run_spectrum_resolves_easy_scene(small_config):
    run = harness.run_spectrum(small_config(noise={"gsnr_db": [15.0]}))
    assert (run.alpha, run.gsnr_db) == (2.0, 15.0)
    for method, spectrum in run.spectra.items():
        assert np.allclose(find_peaks(spectrum, 2), [40.0, 100.0], atol=2.0), method


def test_zero_assumed_sources_gives_flat_music(small_config):
    run = harness.run_spectrum(small_config(assumed_k=0, methods=["music"]))
    rows = run.tables()["spectrum_music.csv"]
    assert all(r["value_db"] == 0.0 for r in rows)


def test_mc_sweep_rows_and_order(small_config):
    cfg = small_config(noise={"alphas": [2.0, 1.7], "gsnr_db": [10.0, 0.0]}, trials=3)
    run = harness.run_mc_sweep(cfg)
    keys = [(r.alpha, r.gsnr_db, r.method) for r in run.rows]
    methods = ["music", "music_like_fixed", "music_like_adaptive"]
    assert keys == [(a, g, m) for a in (2.0, 1.7) for g in (10.0, 0.0) for m in methods]
    for r in run.rows:
        assert r.trials == 3
        assert 0.0 <= r.prob_resolution <= 1.0
        assert (r.mean_rmse_deg is None) == (r.resolved_count == 0)


def test_mc_sweep_high_gsnr_gaussian_music_always_resolves(small_config):
    run = harness.run_mc_sweep(small_config(methods=["music"], trials=5, noise={"gsnr_db": [20.0]}))
    (row,) = run.rows
    assert row.prob_resolution == 1.0
    assert row.mean_rmse_deg < 1.0


def test_mc_sweep_independent_of_threads(small_config):
    cfg = small_config(trials=6, noise={"alphas": [1.8], "gsnr_db": [0.0]})
    serial = [r.to_dict() for r in harness.run_mc_sweep(cfg, threads=1).rows]
    threaded = [r.to_dict() for r in harness.run_mc_sweep(cfg, threads=3).rows]
    assert serial == threaded


def test_split_sweep_concatenates_to_full_sweep(small_config):
    cfg = small_config(noise={"alphas": [2.0, 1.8], "gsnr_db": [5.0, -5.0]}, trials=2)
    full = [r.to_dict() for r in harness.run_mc_sweep(cfg).rows]
    parts = []
    for alpha in (2.0, 1.8):
        for gsnr in (5.0, -5.0):
            sub = cfg.with_overrides(alphas=[alpha], gsnrs=[gsnr])
            parts.extend(r.to_dict() for r in harness.run_mc_sweep(sub).rows)
    assert parts == full


def test_sweep_curves_one_file_per_alpha(small_config):
    cfg = small_config(noise={"alphas": [2.0, 1.7], "gsnr_db": [10.0, 0.0]}, trials=2)
    curves = harness.run_mc_sweep(cfg).curves()
    assert sorted(curves) == [
        "prob_resolution_alpha1.7.csv",
        "prob_resolution_alpha2.csv",
        "rmse_alpha1.7.csv",
        "rmse_alpha2.csv",
    ]
    rows = curves["prob_resolution_alpha2.csv"]
    assert [r["gsnr_db"] for r in rows] == [10.0, 0.0]
    assert set(rows[0]) == {"gsnr_db", "music", "music_like_fixed", "music_like_adaptive"}


def test_beta_trace_invariants(small_config):
    cfg = small_config(noise={"gsnr_db": [0.0]}, snapshots=200)
    run = harness.run_beta_trace(cfg)
    b = run.bounds
    assert 0.0 < b["beta_min"] <= b["beta_max"]
    assert len(run.trace) == 179
    assert run.by_gsnr == []
    assert list(run.tables()) == ["beta_trace.csv"]
    for row in run.trace:
        assert b["beta_min"] - 1e-12 <= row["beta_theta"] <= b["beta_max"] + 1e-12
        assert row["beta_fixed"] == pytest.approx(run.trace[0]["beta_fixed"])
        assert 0.0 <= row["xi_theta"] <= 1.0


def test_beta_trace_across_gsnr(small_config):
    cfg = small_config(noise={"gsnr_db": [0.0, -10.0, 10.0]})
    run = harness.run_beta_trace(cfg)
    assert [r["gsnr_db"] for r in run.by_gsnr] == [0.0, -10.0, 10.0]
    assert set(run.tables()) == {"beta_trace.csv", "beta_vs_gsnr.csv"}
    for r in run.by_gsnr:
        assert r["beta_min"] <= r["beta_fixed"] <= r["beta_max"]
        assert r["b_principal"] == pytest.approx(r["beta_fixed"] + 1.0)
        assert r["lambda_ratio"] >= 1.0


def test_noise_validate_passes_band():
    run = harness.run_noise_validate(1.7, 0.5, 20_000, seed=3)
    s = run.summary
    assert s["band_checked"]
    assert s["passed"], s
    assert s["dispersion"] == pytest.approx(0.25 ** 1.7)
    assert len(run.ecf) == 5
    assert len(run.preview) == 200


def test_noise_validate_real_kind():
    run = harness.run_noise_validate(1.2, 0.8, 20_000, seed=4, kind="real")
    assert run.summary["dispersion"] == pytest.approx(0.8)
    assert run.summary["passed"]


def test_noise_validate_small_sample_skips_band(caplog):
    with caplog.at_level(logging.WARNING, logger="app.services.harness"):
        run = harness.run_noise_validate(1.5, 1.0, 10, seed=1)
    assert not run.summary["band_checked"]
    assert not run.summary["passed"]
    assert len(run.preview) == 10
    assert any("skipped" in r.getMessage() for r in caplog.records)


def test_noise_validate_heavier_tails_for_smaller_alpha():
    gaussian = harness.run_noise_validate(2.0, 1.0, 20_000, seed=9).summary
    heavy = harness.run_noise_validate(1.7, 1.0, 20_000, seed=9).summary
    assert heavy["max_abs_sample"] > gaussian["max_abs_sample"]


def test_noise_validate_rejects_unknown_kind():
    with pytest.raises(ParameterError):
        harness.run_noise_validate(1.5, 1.0, 100, seed=1, kind="quaternion")


def test_persist_writes_tables_and_manifest(tmp_path, small_config):
    cfg = small_config()
    run = harness.run_spectrum(cfg)
    store = ResultStore(tmp_path / "spec")
    written = harness.persist(store, "spectrum", run.tables(), cfg.model_dump(mode="json"), cfg.master_seed, 0.0)
    assert sorted(written) == sorted(run.tables())
    text = (tmp_path / "spec" / "spectrum_music.csv").read_text(encoding="utf-8")
    assert text.startswith(SCHEMA_HEADER + "\nangle_deg,value_db,beta\n")
    df = read_table(tmp_path / "spec" / "spectrum_music_like_fixed.csv")
    assert len(df) == 179
    manifest = json.loads((tmp_path / "spec" / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert manifest["rmse_convention"] == harness.RMSE_CONVENTION
    assert manifest["gsnr_reference"] == harness.GSNR_REFERENCE
    assert "alpha, gsnr_db, trial" in manifest["trial_seed_key"]
    assert manifest["master_seed"] == 7
    assert manifest["config"]["scene"]["doas"] == [40.0, 100.0]


def test_persisted_sweep_is_byte_identical_across_runs(tmp_path, small_config):
    cfg = small_config(trials=2)
    texts = []
    for name in ("a", "b"):
        run = harness.run_mc_sweep(cfg)
        store = ResultStore(tmp_path / name)
        harness.persist(store, "mc-sweep", {**run.tables(), **run.curves()}, cfg.model_dump(mode="json"), 7, 0.0)
        texts.append((tmp_path / name / "sweep.csv").read_bytes())
    assert texts[0] == texts[1]


def test_single_trial_probability_is_binary(small_config):
    run = harness.run_mc_sweep(small_config(trials=1, noise={"alphas": [1.7], "gsnr_db": [-5.0]}))
    assert all(r.prob_resolution in (0.0, 1.0) for r in run.rows)


def test_noise_only_scene_falls_back(small_config, caplog):
    cfg = small_config(scene={"doas": []}, methods=["music_like_adaptive"])
    with caplog.at_level(logging.WARNING, logger="app.services.spectral"):
        run = harness.run_beta_trace(cfg)
    assert run.bounds["fallback"]
    assert run.bounds["beta_min"] == pytest.approx(0.9 * run.bounds["beta_max"])
    betas = np.array([r["beta_theta"] for r in run.trace])
    assert betas.max() - betas.min() <= 0.1 * run.bounds["beta_max"] + 1e-12
