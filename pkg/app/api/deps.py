from datetime import datetime, timezone
from typing import Callable

from fastapi import Depends

from app.config import Settings, get_settings
from app.storage import ResultStore


def get_store_factory(settings: Settings = Depends(get_settings)) -> Callable[[str], ResultStore]:
    """
    Dependency returning a callable that opens a fresh run directory under
    OUTPUT_DIR for a command.
    Usage:
        make_store = Depends(get_store_factory)
        store = make_store("mc-sweep")
    """
    def _make(command: str) -> ResultStore:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%f")
        return ResultStore(settings.OUTPUT_DIR / command / stamp)
    return _make
