"""Result tables on disk: a CSV per table plus a JSON metadata sidecar."""
import json
import logging
from pathlib import Path
from typing import Any, Optional, Union

import pandas as pd

from config import APP_VERSION, AppConfig, EmfNetError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"


class ResultsIOError(EmfNetError):
    """Result file could not be written or read"""
    def __init__(self, path: Union[str, Path], message: str):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


def emit_results(
    table: pd.DataFrame,
    out_dir: Union[str, Path],
    name: str,
    *,
    config: Optional[AppConfig] = None,
    master_seed: Optional[int] = None,
    extra: Optional[dict[str, Any]] = None,
) -> tuple[Path, Path]:
    """Write `<name>.csv` and `<name>.json` into `out_dir`.

    Numbers keep 9 significant digits and the column order of `table`. The
    sidecar holds the full config, the master seed and the code version; it
    carries no timestamps, so identical runs give identical files.

    Returns:
        (csv path, sidecar path)

    Raises:
        ResultsIOError: If the directory or a file cannot be written.
    """
    out_dir = Path(out_dir)
    csv_path = out_dir / f"{name}.csv"
    meta_path = out_dir / f"{name}.json"
    metadata = {
        "name": name,
        "app_version": APP_VERSION,
        "columns": list(table.columns),
        "rows": len(table),
        "master_seed": master_seed,
        "config": config.to_dict() if config is not None else None,
        "sar_dl_placeholder": config.sim.sar_dl_is_placeholder if config is not None else None,
    }
    if extra:
        metadata.update(extra)

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        table.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        with open(meta_path, "w", encoding="utf-8") as f:
            json.dump(metadata, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
    except OSError as e:
        raise ResultsIOError(e.filename or out_dir, f"cannot write results: {e.strerror or e}")
    logger.info(f"Wrote {len(table)} rows to {csv_path}")
    return csv_path, meta_path


def read_results(path: Union[str, Path]) -> pd.DataFrame:
    """Read a CSV written by emit_results.

    Raises:
        ResultsIOError: If the file is missing or not a CSV table.
    """
    try:
        return pd.read_csv(path)
    except OSError as e:
        raise ResultsIOError(path, f"cannot read results: {e.strerror or e}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ResultsIOError(path, f"malformed results table: {e}")


def read_metadata(path: Union[str, Path]) -> dict:
    """Read the JSON sidecar next to a results CSV (either path may be given)."""
    path = Path(path).with_suffix(".json")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ResultsIOError(path, f"cannot read metadata: {e.strerror or e}")
    except json.JSONDecodeError as e:
        raise ResultsIOError(path, f"invalid metadata: {e}")
