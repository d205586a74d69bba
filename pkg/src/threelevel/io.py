"""CSV/JSON emission with locale-free, fixed-precision number formatting."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

SIG_DIGITS = 9


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "nan"
    x = float(value)
    if math.isnan(x):
        return "nan"
    return format(x + 0.0, f".{SIG_DIGITS}g")  # + 0.0 folds -0.0 into 0.0


def jsonable(obj):
    """Convert numpy containers and non-finite floats to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(fmt(x))
    return obj


def write_json(path: Path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path: Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def grid_rows(grid, name: str):
    """Yield ``(omega20, lam, value)`` rows in row-major cell order."""
    xs, ys = grid.axes[0].values(), grid.axes[1].values()
    vals = grid.values[name]
    k = 0
    for x in xs:
        for y in ys:
            yield (float(x), float(y), vals[k])
            k += 1


def write_grid(grid, name: str, out_dir: Path, fmt_name: str = "csv") -> Path:
    out_dir = Path(out_dir)
    if fmt_name == "csv":
        header = [grid.axes[0].name, grid.axes[1].name, name]
        return write_csv(out_dir / f"sweep_{name}.csv", header, grid_rows(grid, name))
    payload = {
        "observable": name,
        "axes": [
            {"name": a.name, "min": a.start, "max": a.stop, "count": a.count}
            for a in grid.axes
        ],
        "values": grid.values[name],
        "metadata": grid.metadata,
    }
    return write_json(out_dir / f"sweep_{name}.json", payload)
