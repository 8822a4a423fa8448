"""Deterministic data artifacts: CSV tables, JSON sidecars, manifests.

CSV files use '.' decimals, '\n' line endings and 17 significant
digits, so identical inputs reproduce byte-identical files (the
manifest's timestamp is the one excluded field).
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import canonical_json


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(payload), encoding="utf-8", newline="\n")
    return path


def field_rows(sol, max_radius: int | None = None):
    """(layer, n_x, n_y, re, im) rows of both photon fields."""
    nx, ny = sol.site_coordinates()
    if max_radius is None:
        mask = np.ones(nx.shape, dtype=bool)
    else:
        mask = (np.abs(nx) <= max_radius) & (np.abs(ny) <= max_radius)
    for layer, fld in ((1, sol.field_a1), (2, sol.field_a2)):
        for x, y, v in zip(nx[mask].ravel(), ny[mask].ravel(), fld[mask].ravel()):
            yield layer, int(x), int(y), v, 0.0


def write_solution(outdir, name, sol, params: dict, max_radius: int | None = None):
    """Field CSV plus JSON sidecar; returns both paths."""
    outdir = Path(outdir)
    csv_path = write_csv(outdir / f"{name}.csv",
                         ("layer", "n_x", "n_y", "re", "im"),
                         field_rows(sol, max_radius))
    sidecar = {"E_BS": sol.energy, "c_e": sol.c_e, "method": sol.method,
               "params": params}
    json_path = write_json(outdir / f"{name}.json", sidecar)
    return csv_path, json_path


def write_manifest(outdir, config: dict, outputs, wall_time_s: float) -> Path:
    digest = hashlib.sha256(canonical_json(config).encode()).hexdigest()
    payload = {
        "inputs_hash": digest,
        "artifact_version": __version__,
        "wall_time_s": wall_time_s,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "outputs": sorted(str(Path(p).name) for p in outputs),
        "config": config,
    }
    return write_json(Path(outdir) / "manifest.json", payload)
