"""CSV series files with a JSON sidecar.

Rows are ``index, x, u, y, imputed``; row 0 leaves ``y`` and ``imputed``
empty.  Reals are written with ``repr`` (shortest round-trip form), so a
reload reproduces every value bit for bit and stagnation equalities survive.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .imputation import ControlMask, ImputedSeries, impute
from .processes import ProcessConfig, ProcessPath

COLUMNS = ("index", "x", "u", "y", "imputed")


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def series_csv(series: ImputedSeries) -> str:
    lines = [",".join(COLUMNS)]
    x, u, y, imp = series.x.values, series.u, series.y, series.imputed
    lines.append(f"0,{float(x[0])!r},{int(u[0])},,")
    for i in range(1, x.size):
        lines.append(f"{i},{float(x[i])!r},{int(u[i])},{float(y[i])!r},{int(imp[i])}")
    return "\n".join(lines) + "\n"


def series_header(series: ImputedSeries, seed: int | None = None) -> dict:
    return {
        "process": series.x.config.to_dict(),
        "T": series.T,
        "p": series.p,
        "seed": series.x.seed if seed is None else seed,
        "n": series.n,
    }


def write_series(series: ImputedSeries, path, seed: int | None = None) -> Path:
    """Write the CSV and its sidecar; each file is replaced atomically.

    ``seed`` is the user-level seed recorded in the sidecar (default: the path's own seed).
    """
    path = Path(path)
    _atomic_write(path, series_csv(series))
    _atomic_write(sidecar_path(path), json.dumps(series_header(series, seed), indent=2, sort_keys=True) + "\n")
    return path


def read_series(path) -> ImputedSeries:
    """Reload a series; the stored y column must equal the re-imputed one exactly."""
    path = Path(path)
    try:
        header = json.loads(sidecar_path(path).read_text())
    except FileNotFoundError:
        raise StructuralError(f"missing sidecar {sidecar_path(path)}") from None
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise StructuralError(f"expected columns {COLUMNS}, got {rows[0] if rows else None}")
    body = rows[1:]
    if [int(r[0]) for r in body] != list(range(len(body))):
        raise StructuralError("index column must run 0..n without gaps")
    if body and (body[0][3] != "" or body[0][4] != ""):
        raise StructuralError("row 0 must leave y and imputed empty")
    x = np.array([float(r[1]) for r in body])
    u = np.array([int(r[2]) for r in body], dtype=np.uint8)
    y_file = np.array([np.nan] + [float(r[3]) for r in body[1:]])
    config = ProcessConfig.from_dict(header["process"])
    mask = ControlMask(u, int(header["T"]), float(header["p"]), header.get("seed"))
    series = impute(ProcessPath(x, config, header.get("seed")), mask)
    if not np.array_equal(series.y[1:], y_file[1:]):
        raise StructuralError("y column is inconsistent with x, u and T")
    return series
