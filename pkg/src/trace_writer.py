import json
import logging
import os
from dataclasses import asdict
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import pandas as pd
import pytz

from .models import Violation

logger = logging.getLogger('VilleBet')

FLOAT_FORMAT = '%.17g'
VIOLATION_COLUMNS = ["check", "n", "value", "limit", "slack", "replication", "detail"]


def _ensure_parent(path: str):
    parent = os.path.dirname(path)
    if parent and not os.path.exists(parent):
        os.makedirs(parent)


def write_table(table: pd.DataFrame, path: str) -> str:
    """Writes a result table as CSV: 17 significant digits, not-applicable as an empty field."""
    _ensure_parent(path)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='')
    logger.info(f"Wrote {len(table)} rows to {path}")
    return path


def violations_path(out_path: str) -> str:
    stem, ext = os.path.splitext(out_path)
    return f"{stem}.violations{ext or '.csv'}"


def write_violations(violations: List[Violation], out_path: str) -> Optional[str]:
    """Writes violation rows next to the main output; nothing is written when there are none."""
    if not violations:
        return None
    path = violations_path(out_path)
    return write_table(pd.DataFrame([asdict(v) for v in violations], columns=VIOLATION_COLUMNS), path)


def local_now(tz_name: str = 'UTC') -> datetime:
    try:
        tz = pytz.timezone(tz_name)
    except pytz.UnknownTimeZoneError:
        logger.warning(f"Unknown timezone '{tz_name}', falling back to UTC")
        tz = pytz.utc
    return datetime.now(timezone.utc).astimezone(tz)


def write_run_summary(summary: Dict[str, Any], out_path: str, started: datetime, tz_name: str = 'UTC') -> str:
    """Writes <out>.summary.json with the run timings in the configured timezone."""
    finished = local_now(tz_name)
    record = dict(summary)
    record.update({
        "started": started.strftime('%Y-%m-%d %H:%M:%S %Z'),
        "finished": finished.strftime('%Y-%m-%d %H:%M:%S %Z'),
        "elapsed_seconds": round((finished - started).total_seconds(), 3),
    })
    stem, _ = os.path.splitext(out_path)
    path = f"{stem}.summary.json"
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(record, f, indent=2, sort_keys=True, default=str)
    logger.info(f"Run summary written to {path} (finished {record['finished']})")
    return path
