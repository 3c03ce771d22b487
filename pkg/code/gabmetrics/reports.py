import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    elif isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    elif isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    elif isinstance(value, (bool, np.bool_)):
        return bool(value)
    elif isinstance(value, (int, np.integer)):
        return int(value)
    elif isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan; write them as strings so readers can round-trip
        return value if math.isfinite(value) else str(value)
    elif value is None or isinstance(value, str):
        return value
    return str(value)


def dumps_report(report: Dict) -> str:
    """Sorted keys and a trailing newline, so two runs give identical bytes"""
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_json(report: Dict, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report), encoding="utf-8")
    log.info(msg=f"Wrote {path}")
    return path


def write_csv(
    frame: pd.DataFrame, path: Union[str, Path], float_format: str = CSV_FLOAT_FORMAT
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=float_format)
    log.info(msg=f"Wrote {len(frame)} rows to {path}")
    return path
