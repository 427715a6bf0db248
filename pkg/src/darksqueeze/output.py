"""Writers for datasets and reports.

CSV files are long format with a block of ``# key: value`` header lines.
The first line, ``# generated: <UTC timestamp>``, is the only part that
changes between identical runs; :func:`strip_timestamp` removes it for
comparisons.  Floats are written with ``repr`` so values round-trip.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__

TIMESTAMP_PREFIX = "# generated: "


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def to_jsonable(v):
    """Convert numpy and complex values into JSON-friendly objects."""
    if isinstance(v, dict):
        return {str(k): to_jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [to_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return to_jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def base_metadata(config_data: dict, **extra) -> dict:
    meta = {"tool": "darksqueeze", "version": __version__, "config": config_data}
    meta.update(extra)
    return meta


def timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def write_csv(path, meta: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [TIMESTAMP_PREFIX + timestamp()]
    for key in sorted(meta):
        lines.append(f"# {key}: {json.dumps(to_jsonable(meta[key]), sort_keys=True)}")
    body = io.StringIO()
    writer = csv.writer(body, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([_cell(x) for x in row] for row in rows)
    path.write_text("\n".join(lines) + "\n" + body.getvalue())
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_table(directory, name: str, meta: dict, columns: Sequence[str], rows, fmt: str = "csv") -> Path:
    """Write a dataset as ``name.csv`` or ``name.json`` (records plus metadata)."""
    directory = Path(directory)
    if fmt == "csv":
        return write_csv(directory / f"{name}.csv", meta, columns, rows)
    records = [dict(zip(columns, r)) for r in rows]
    return write_json(directory / f"{name}.json", {"meta": meta, "columns": list(columns),
                                                   "rows": records})


def read_csv(path):
    """Parse a file written by :func:`write_csv` into ``(meta, columns, rows)``."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value if key == "generated" else json.loads(value)
        else:
            body.append(line)
    table = list(csv.reader(body))
    return meta, table[0], table[1:]


def strip_timestamp(text: str) -> str:
    return "\n".join(l for l in text.splitlines() if not l.startswith(TIMESTAMP_PREFIX))
