# app/api/routes/experiments.py
import time
from typing import Any, Callable, Dict, List, Optional

from fastapi import APIRouter, Depends, HTTPException

from app.api.deps import get_store_factory
from app.api.schemas.experiment import NoiseValidateRequest, ResultRowOut, RunRequest
from app.core.errors import DegenerateInputError, DoaLabError, ParameterError, SingularMatrixError
from app.services import harness
from app.storage import ResultStore

router = APIRouter(prefix="/api/experiments", tags=["experiments"])


def _http_error(e: DoaLabError) -> HTTPException:
    if isinstance(e, SingularMatrixError):
        return HTTPException(status_code=422, detail=str(e))
    if isinstance(e, (ParameterError, DegenerateInputError)):
        return HTTPException(status_code=400, detail=str(e))
    return HTTPException(status_code=500, detail=str(e))


def _maybe_persist(persist: bool, make_store: Callable[[str], ResultStore], command: str,
                   tables: Dict[str, List[Dict[str, Any]]], config: Dict[str, Any], seed: int,
                   started: float, extra: Optional[Dict[str, Any]] = None) -> Optional[Dict[str, Any]]:
    if not persist:
        return None
    store = make_store(command)
    written = harness.persist(store, command, tables, config, seed, started, extra=extra)
    return {"run_dir": str(store.run_dir), "files": written}


@router.post("/spectrum")
def spectrum(payload: RunRequest, make_store=Depends(get_store_factory)):
    """
    Spectra for every configured method on one synthesized data block at the
    first (alpha, GSNR) point.
    """
    started = time.perf_counter()
    config = payload.config
    try:
        run = harness.run_spectrum(config)
    except DoaLabError as e:
        raise _http_error(e)
    tables = run.tables()
    saved = _maybe_persist(payload.persist, make_store, "spectrum", tables, config.model_dump(mode="json"),
                           config.master_seed, started, extra=run.manifest_extra())
    return {
        "alpha": run.alpha,
        "gsnr_db": run.gsnr_db,
        "spectra": {m.value: s.to_rows() for m, s in run.spectra.items()},
        "saved": saved,
    }


@router.post("/mc-sweep")
def mc_sweep(payload: RunRequest, make_store=Depends(get_store_factory)):
    started = time.perf_counter()
    config = payload.config
    try:
        run = harness.run_mc_sweep(config, threads=payload.threads)
    except DoaLabError as e:
        raise _http_error(e)
    tables = {**run.tables(), **run.curves()}
    saved = _maybe_persist(payload.persist, make_store, "mc-sweep", tables, config.model_dump(mode="json"),
                           config.master_seed, started)
    rows = [ResultRowOut(**r.to_dict()) for r in run.rows]
    return {"rows": [r.model_dump() for r in rows], "rmse_convention": harness.RMSE_CONVENTION, "saved": saved}


@router.post("/noise-validate")
def noise_validate(payload: NoiseValidateRequest, make_store=Depends(get_store_factory)):
    started = time.perf_counter()
    try:
        run = harness.run_noise_validate(payload.alpha, payload.gamma, payload.n, payload.seed, kind=payload.kind)
    except DoaLabError as e:
        raise _http_error(e)
    echo = payload.model_dump(exclude={"persist", "seed"})
    saved = _maybe_persist(payload.persist, make_store, "noise-validate", run.tables(), echo, payload.seed,
                           started, extra={"summary": run.summary})
    return {"summary": run.summary, "ecf": run.ecf, "saved": saved}


@router.post("/beta-trace")
def beta_trace(payload: RunRequest, make_store=Depends(get_store_factory)):
    started = time.perf_counter()
    config = payload.config
    try:
        run = harness.run_beta_trace(config)
    except DoaLabError as e:
        raise _http_error(e)
    saved = _maybe_persist(payload.persist, make_store, "beta-trace", run.tables(), config.model_dump(mode="json"),
                           config.master_seed, started, extra={"bounds": run.bounds})
    return {"bounds": run.bounds, "trace": run.trace, "by_gsnr": run.by_gsnr, "saved": saved}
