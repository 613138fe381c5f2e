# app/storage.py
"""
File-backed result store. Every run writes its CSV tables and one JSON
manifest into a run directory under OUTPUT_DIR. Files are written under a
FileLock so concurrent writers never interleave a table.

Usage:
    from app.storage import ResultStore
    store = ResultStore(Path("results/fig5"))
    store.write_table("music.csv", rows)
    store.write_manifest({...})
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
from datetime import datetime, timezone
import json
import io

import pandas as pd
from filelock import FileLock

SCHEMA_VERSION = "v1"
SCHEMA_HEADER = f"# doa-lab schema {SCHEMA_VERSION}"
MANIFEST_NAME = "manifest.json"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def table_text(rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None) -> str:
    """Render rows as schema-tagged CSV text (header comment, then the table)."""
    df = pd.DataFrame(list(rows), columns=columns)
    buf = io.StringIO()
    buf.write(SCHEMA_HEADER + "\n")
    df.to_csv(buf, index=False, lineterminator="\n", na_rep="")
    return buf.getvalue()


def read_table(path: Path) -> pd.DataFrame:
    """Read a table written by ResultStore, skipping the schema comment."""
    return pd.read_csv(path, comment="#")


class ResultStore:
    """
    Manages the output files of a single run directory.
    """

    def __init__(self, run_dir: Path):
        self.run_dir = Path(run_dir)

    def _file_path(self, name: str) -> Path:
        return self.run_dir / Path(name)

    def _lock_for(self, path: Path) -> FileLock:
        return FileLock(str(path) + ".lock")

    def _write_text(self, name: str, text: str) -> Path:
        path = self._file_path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock_for(path):
            path.write_text(text, encoding="utf-8")
        return path

    def write_table(self, name: str, rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None) -> Path:
        return self._write_text(name, table_text(rows, columns))

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        return self._write_text(name, json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")

    def write_manifest(self, command: str, config: Dict[str, Any], seed: int, wall_time_s: float,
                       outputs: List[str], extra: Optional[Dict[str, Any]] = None) -> Path:
        """
        Run manifest. `created_at` and `wall_time_s` are the only fields that vary
        between identical runs.
        """
        payload = {
            "command": command,
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "master_seed": int(seed),
            "outputs": sorted(outputs),
            "wall_time_s": round(float(wall_time_s), 3),
            "created_at": _utc_now(),
        }
        if extra:
            payload.update(extra)
        return self.write_json(MANIFEST_NAME, payload)
