"""
Plot-ready CSV emission: convergence tables and path overlays.

Files are comma-separated with a header row and LF line endings; floats are
written with 17 significant digits so they round-trip exactly.
"""
from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from ..continuum import bmid_from_path
from ..paths import RngStream, TimeGrid, sample_brownian, skorohod_map
from .runner import ResultRecord

TABLE_COLUMNS = ("n", "ks", "p_value", "w1")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: str | Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_") or "functional"


def load_records(path: str | Path) -> list[ResultRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(ResultRecord(**json.loads(line)))
    return out


def emit_plot_data(records, out_dir: str | Path, format: str = "csv") -> list[Path]:
    """One ``(n, ks, p_value, w1)`` table per functional.

    Records without an exponent are skipped.  With no functionals at all a
    header-only ``convergence.csv`` is written so downstream tooling always
    finds a file.
    """
    if format != "csv":
        raise ValueError(f"unsupported plot-data format {format!r}")
    out_dir = Path(out_dir)
    tables: dict[str, list] = {}
    for r in records:
        if r.n is None:
            continue
        s = r.stats
        tables.setdefault(r.functional, []).append((r.n, s.get("ks"), s.get("p_value"), s.get("w1")))
    if not tables:
        return [write_csv(out_dir / "convergence.csv", TABLE_COLUMNS, [])]
    return [write_csv(out_dir / f"convergence_{_slug(f)}.csv", TABLE_COLUMNS, sorted(rows, key=lambda r: r[0]))
            for f, rows in tables.items()]


def overlay_data(out_dir: str | Path, seed: int = 0, K: float = 1.0, v: float = 0.0,
                 t_max: float = 1.0, steps: int = 2**12) -> list[Path]:
    """Reflected Brownian motion and BMID driven by the same Brownian path.

    Writes ``overlay_reflected.csv`` and ``overlay_bmid.csv`` with columns
    ``(t, value)``.
    """
    grid = TimeGrid(t_max, steps)
    b = sample_brownian(grid, RngStream(seed, 0))
    reflected, _ = skorohod_map(b)
    bmid = bmid_from_path(b, K, v).x
    t = grid.times()
    out_dir = Path(out_dir)
    return [
        write_csv(out_dir / "overlay_reflected.csv", ("t", "value"), zip(t, reflected.values)),
        write_csv(out_dir / "overlay_bmid.csv", ("t", "value"), zip(t, bmid.values)),
    ]
