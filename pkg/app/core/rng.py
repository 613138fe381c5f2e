# app/core/rng.py
"""
Seed derivation for Monte Carlo runs.

Every trial owns a stream derived from (master_seed, alpha, gsnr, trial_index)
through numpy's SeedSequence spawn keys, so a trial draws the same numbers no
matter which worker runs it or in which order.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from app.core.errors import ParameterError

# fixed-point encodings keep spawn keys integral and non-negative
_ALPHA_SCALE = 10_000
_GSNR_OFFSET_DB = 1_000.0
_GSNR_SCALE = 10_000


def _encode_alpha(alpha: float) -> int:
    return int(round(float(alpha) * _ALPHA_SCALE))


def _encode_gsnr(gsnr_db: float) -> int:
    return int(round((float(gsnr_db) + _GSNR_OFFSET_DB) * _GSNR_SCALE))


def trial_seed_sequence(master_seed: int, alpha: float, gsnr_db: float, trial_index: int) -> np.random.SeedSequence:
    if trial_index < 0:
        raise ParameterError(f"trial_index must be non-negative, got {trial_index}")
    key = (_encode_alpha(alpha), _encode_gsnr(gsnr_db), int(trial_index))
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)


def trial_rng(master_seed: int, alpha: float, gsnr_db: float, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed_sequence(master_seed, alpha, gsnr_db, trial_index)))


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    """Plain seeded generator for single-shot runs and tests."""
    return np.random.default_rng(seed)
