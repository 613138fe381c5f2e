# tests/test_array_model.py
import numpy as np
import pytest

from app.core.errors import ParameterError
from app.models.array import ArrayGeometry, SnapshotMatrix, SourceScene
from app.models.noise import NoiseParams
from app.services.array_model import scan_grid, steering_matrix, steering_vector, synthesize_snapshots


def test_steering_columns_are_unit_norm(geom10):
    a = steering_matrix(geom10, np.linspace(1.0, 179.0, 37))
    assert a.shape == (10, 37)
    assert np.allclose(np.linalg.norm(a, axis=0), 1.0, atol=1e-12)


def test_broadside_steering_is_flat(geom10):
    a = steering_vector(geom10, 90.0)
    assert np.allclose(a, np.ones(10) / np.sqrt(10), atol=1e-12)


def test_steering_phase_progression():
    geom = ArrayGeometry(m=4, spacing=1.0)
    a = steering_vector(geom, 60.0) * 2.0
    # half-wavelength spacing: phase step pi cos(60 deg) = pi / 2
    assert np.allclose(a, np.exp(1j * np.pi / 2 * np.arange(4)))


def test_steering_vector_matches_matrix_column(geom10):
    grid = [30.0, 75.5, 140.0]
    a = steering_matrix(geom10, grid)
    for i, theta in enumerate(grid):
        assert np.allclose(steering_vector(geom10, theta), a[:, i])


@pytest.mark.parametrize("theta", [-1.0, 180.5, np.nan])
def test_steering_rejects_out_of_range(geom10, theta):
    with pytest.raises(ParameterError):
        steering_matrix(geom10, [theta])


def test_default_scan_grid():
    grid = scan_grid()
    assert grid[0] == pytest.approx(0.5)
    assert grid[-1] == pytest.approx(179.5)
    assert grid.size == 359
    assert np.allclose(np.diff(grid), 0.5)


def test_scan_grid_validation():
    with pytest.raises(ParameterError):
        scan_grid(step=0.0)
    with pytest.raises(ParameterError):
        scan_grid(margin=95.0)


def test_geometry_and_scene_validation():
    with pytest.raises(ParameterError):
        ArrayGeometry(m=1)
    with pytest.raises(ParameterError):
        SourceScene(doas=[0.0])
    with pytest.raises(ParameterError):
        SourceScene(doas=[50.0, 50.0])
    with pytest.raises(ParameterError):
        SourceScene(doas=[50.0, 60.0], powers=[1.0])
    with pytest.raises(ParameterError):
        SourceScene(doas=[50.0], powers=[-1.0])


def test_noiseless_snapshots_lie_in_source_span(geom10, rng):
    scene = SourceScene(doas=[50.0, 60.0, 110.0])
    x = synthesize_snapshots(geom10, scene, 64, None, rng)
    a = steering_matrix(geom10, scene.doas)
    q, _ = np.linalg.qr(a)
    residual = x.data - q @ (q.conj().T @ x.data)
    assert np.linalg.norm(residual) < 1e-10 * np.linalg.norm(x.data)


def test_source_power_is_respected():
    geom = ArrayGeometry(m=6)
    scene = SourceScene(doas=[90.0], powers=[2.0])
    x = synthesize_snapshots(geom, scene, 40_000, None, np.random.default_rng(8))
    # unit-norm steering: total received energy per snapshot equals source power
    assert np.mean(np.sum(np.abs(x.data) ** 2, axis=0)) == pytest.approx(2.0, rel=0.03)


def test_synthesis_is_deterministic(geom10):
    scene = SourceScene(doas=[40.0, 100.0])
    noise = NoiseParams(alpha=1.8, gamma=0.3)
    x1 = synthesize_snapshots(geom10, scene, 20, noise, np.random.default_rng(5))
    x2 = synthesize_snapshots(geom10, scene, 20, noise, np.random.default_rng(5))
    assert np.array_equal(x1.data, x2.data)
    assert (x1.m, x1.n) == (10, 20)


def test_synthesis_rejects_empty_block(geom10, rng):
    with pytest.raises(ParameterError):
        synthesize_snapshots(geom10, SourceScene(doas=[40.0]), 0, None, rng)


def test_snapshot_matrix_promotes_vector():
    x = SnapshotMatrix(data=np.arange(4))
    assert x.data.shape == (4, 1)
    assert x.data.dtype == complex


def test_steering_is_conjugate_symmetric_about_broadside(geom10):
    thetas = np.arange(0.25, 180.0, 0.25)
    a = steering_matrix(geom10, thetas)
    mirrored = steering_matrix(geom10, 180.0 - thetas)
    assert np.allclose(mirrored, a.conj(), atol=1e-12)
