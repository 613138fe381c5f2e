from fastapi import FastAPI
import logging
from contextlib import asynccontextmanager

from app.config import settings
from app.api.routes import experiments as experiment_routes

logger = logging.getLogger("uvicorn.error")


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Startup check: report where persisted runs will land.
    """
    try:
        out = settings.OUTPUT_DIR
        if out.exists():
            logger.info("Result directory: %s (ENV=%s)", out, settings.ENV)
        else:
            logger.info("Result directory %s does not exist yet; it is created on the first persisted run", out)
    except Exception as e:
        logger.warning("Error while checking output directory at startup: %s", e)

    yield
    logger.info("Shutting down doa-lab API")

app = FastAPI(title="doa-lab API", version="0.1.0", lifespan=lifespan)

app.include_router(experiment_routes.router)


@app.get("/", tags=["root"])
async def root():
    return {"status": "ok", "service": "doa-lab API"}
