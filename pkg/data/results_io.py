"""Result tables and run manifests on disk."""
import json
import logging
import os
import platform
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
import scipy

from models import __version__
from models.errors import OutputError, ParameterError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
MANIFEST_NAME = "manifest.json"


def _plain(value):
    """Python scalars for numpy values so json and csv writers agree"""
    if isinstance(value, np.generic):
        return value.item()
    return value


def _columns(rows: List[dict], columns: Optional[Sequence[str]]) -> List[str]:
    if columns is None:
        if not rows:
            raise ParameterError("cannot infer columns from zero rows; pass columns explicitly")
        columns = list(rows[0].keys())
    expected = set(columns)
    for i, row in enumerate(rows):
        if set(row.keys()) != expected:
            raise ParameterError(f"row {i} has keys {sorted(row)}; expected {sorted(expected)}")
    return list(columns)


def emit_results(
    rows: Iterable[dict],
    fmt: str,
    path,
    columns: Optional[Sequence[str]] = None,
) -> str:
    """Write homogeneous rows as RFC-4180 CSV (17 significant digits) or a JSON array"""
    rows = [{key: _plain(value) for key, value in row.items()} for row in rows]
    columns = _columns(rows, columns)
    path = os.fspath(path)

    try:
        if fmt == "csv":
            frame = pd.DataFrame(rows, columns=columns)
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\r\n")
        elif fmt == "json":
            ordered = [{key: row[key] for key in columns} for row in rows]
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                json.dump(ordered, handle, indent=2, allow_nan=False)
                handle.write("\n")
        else:
            raise ParameterError(f"unknown format {fmt!r}; expected csv or json")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise OutputError(path, str(exc)) from exc

    logger.info("wrote %d rows to %s", len(rows), path)
    return path


def load_results(path) -> List[dict]:
    """Read rows written by emit_results back with full float precision"""
    path = os.fspath(path)
    try:
        if path.endswith(".json"):
            with open(path, encoding="utf-8") as handle:
                return json.load(handle)
        frame = pd.read_csv(path, float_precision="round_trip")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    return [{key: _plain(value) for key, value in record.items()} for record in frame.to_dict("records")]


def library_versions() -> Dict[str, str]:
    return {
        'bottleneck_cd': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
    }


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(output_dir, manifest: dict) -> str:
    """Write manifest.json next to the result tables"""
    path = os.path.join(os.fspath(output_dir), MANIFEST_NAME)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True, default=_plain)
            handle.write("\n")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    return path
