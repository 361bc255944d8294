"""CSV and PGM writers with fixed formatting, so reruns are byte identical."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .field import ComplexField

FLOAT_FMT = "%.12e"
PGM_MAXVAL = 65535


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return FLOAT_FMT % float(v)


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_field_csv(path: Path, field: ComplexField) -> None:
    """1D: x_m,re,im,intensity. 2D: x_m,y_m,re,im,intensity with x outer, y inner."""
    v = field.values.ravel()
    cols = [c.ravel() for c in field.grid.mesh()]
    data = np.column_stack(cols + [v.real, v.imag, np.abs(v) ** 2])
    header = ["x_m", "y_m"][: field.grid.dims] + ["re", "im", "intensity"]
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")


def write_pgm(path: Path, intensity: np.ndarray) -> None:
    """ASCII graymap (P2, maxval 65535) scaled to the array maximum.

    ``intensity[r, c]`` is drawn at row r from the top. The scale constant
    is stored in a comment line.
    """
    img = np.asarray(intensity, dtype=float)
    if img.ndim != 2:
        raise ValueError("PGM needs a 2D array")
    peak = float(img.max()) if img.size else 0.0
    q = np.zeros(img.shape, dtype=np.int64) if peak <= 0 else np.rint(img / peak * PGM_MAXVAL).astype(np.int64)
    rows, cols = img.shape
    with open(path, "w", newline="\n") as fh:
        fh.write("P2\n")
        fh.write(f"# max_intensity = {FLOAT_FMT % peak}\n")
        fh.write(f"{cols} {rows}\n{PGM_MAXVAL}\n")
        for line in q:
            fh.write(" ".join(str(int(v)) for v in line) + "\n")


def image_pgm(path: Path, field: ComplexField) -> None:
    """Intensity of a 2D field with +y up and +x to the right."""
    write_pgm(path, field.intensity.T[::-1, :])
