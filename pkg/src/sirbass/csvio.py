"""Self-describing CSV emission and the run manifest.

Every CSV the command line writes uses one schema: a `#`-prefixed header
comment block of `key = value` provenance lines, a column header row, then
plain rows.  Floats are written with repr (shortest round-trip), so files are
bit-stable given identical inputs.  Readers in this package and the plotting
component share the same conventions.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

__all__ = [
    "write_csv",
    "read_csv",
    "write_manifest",
    "marginal_rows",
    "ensemble_rows",
]


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, columns: list[str], rows, meta: dict | None = None) -> None:
    path = Path(path)
    lines = ["# sirbass-csv 1"]
    for key, val in (meta or {}).items():
        lines.append(f"# {key} = {_fmt(val)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[dict, list[str], list[list]]:
    """Returns (meta, column names, rows); numeric cells become floats."""
    meta: dict = {}
    columns: list[str] = []
    rows: list[list] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                meta[key.strip()] = val.strip()
            continue
        cells = line.split(",")
        if not columns:
            columns = [c.strip() for c in cells]
            continue
        parsed = []
        for c in cells:
            try:
                parsed.append(float(c))
            except ValueError:
                parsed.append(c)
        rows.append(parsed)
    return meta, columns, rows


def column(rows: list[list], columns: list[str], name: str) -> np.ndarray:
    return np.asarray([row[columns.index(name)] for row in rows])


def write_manifest(out_dir, command: str, args: dict, seed, duration_s: float) -> Path:
    """One manifest per output directory; suffices to reproduce the run."""
    from . import __version__

    out_dir = Path(out_dir)
    manifest = {
        "tool": "sirbass",
        "version": __version__,
        "command": command,
        "args": {k: v for k, v in args.items() if v is not None},
        "seed": seed,
        "out_dir": str(out_dir),
        "duration_s": round(duration_s, 3),
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def marginal_rows(series):
    """(t, k, S, I, R) rows from a MarginalSeries, node-major."""
    for i, k in enumerate(series.nodes):
        for j, t in enumerate(series.times):
            yield (t, int(k), series.S[i, j], series.I[i, j], series.R[i, j])


def ensemble_rows(est):
    """(t, k, state, mean, stderr) rows from an EnsembleEstimate."""
    names = ("S", "I", "R")
    for s in range(3):
        for i, k in enumerate(est.nodes):
            for j, t in enumerate(est.times):
                yield (t, int(k), names[s], est.mean[s, i, j], est.stderr[s, i, j])
