"""Input fields: 1D stored patterns and 2D object-plane transmissions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import eval_genlaguerre, eval_hermite

from .field import ComplexField, GridSpec

KINDS = ("single_slit", "dark_wire", "plane_wave", "h_with_cross", "hg_mode", "lg_vortex", "raster_mask")
BINARY_KINDS = ("single_slit", "dark_wire", "h_with_cross", "raster_mask")

_SERIES_CUTOFF = 1e-8


def alpha_of(a: float, f: float, wavelength: float) -> float:
    """Transverse wavenumber pi a / (f lambda) of a slit of width ``a``."""
    if not (a > 0 and f > 0 and wavelength > 0):
        raise ValueError("slit width, focal length and wavelength must be positive")
    return math.pi * a / (f * wavelength)


def slit_pattern(alpha: float, C: float, grid: GridSpec) -> ComplexField:
    """Fraunhofer pattern C sin(alpha x)/(alpha x) of a slit on a 1D grid."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if grid.dims != 1:
        raise ValueError("slit pattern needs a 1D grid")
    u = alpha * grid.axis()
    small = np.abs(u) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, u)
    v = np.where(small, 1.0 - u**2 / 6.0, np.sin(safe) / safe)
    return ComplexField(grid, C * v, "transform")


def artificial_pattern(alpha: float, w: float, C: float, grid: GridSpec) -> ComplexField:
    """In-phase comparison pattern C cos^2(alpha x / 2) exp(-x^2/w^2).

    Shares the dark spots at alpha x = +-pi with the slit pattern but has no
    sign change across them.
    """
    if not (alpha > 0 and w > 0):
        raise ValueError("alpha and w must be positive")
    if grid.dims != 1:
        raise ValueError("artificial pattern needs a 1D grid")
    x = grid.axis()
    return ComplexField(grid, C * np.cos(alpha * x / 2) ** 2 * np.exp(-(x**2) / w**2), "transform")


@dataclass(frozen=True)
class HGeometry:
    """Letter H with a dark cross at its center, all lengths in meters.

    Two vertical strokes of width ``stroke`` at the outer edges of a
    ``box`` x ``box`` square, joined by a crossbar of height ``bar``. The
    dark cross is two lines of width ``cross_width`` reaching
    ``cross_arm`` from the center along x and y.
    """

    box: float = 240e-6
    stroke: float = 60e-6
    bar: float = 120e-6
    cross_width: float = 10e-6
    cross_arm: float = 30e-6

    def __post_init__(self):
        if min(self.box, self.stroke, self.bar, self.cross_width, self.cross_arm) <= 0:
            raise ValueError("H geometry must be strictly positive")
        if 2 * self.stroke >= self.box or self.bar >= self.box:
            raise ValueError("H strokes leave no gap")
        if self.cross_arm > min(self.box / 2 - self.stroke, self.bar / 2) or self.cross_width / 2 >= self.cross_arm:
            raise ValueError("dark cross must lie inside the crossbar")

    def rectangles(self):
        """(bright, dark) lists of (x0, x1, y0, y1) rectangles.

        Bright rectangles are disjoint; dark ones lie inside the crossbar.
        """
        h = self.box / 2
        inner = h - self.stroke
        b = self.bar / 2
        bright = [(-h, -inner, -h, h), (inner, h, -h, h), (-inner, inner, -b, b)]
        cw, arm = self.cross_width / 2, self.cross_arm
        dark = [(-cw, cw, -arm, arm), (-arm, arm, -cw, cw)]
        return bright, dark


@dataclass(frozen=True)
class ObjectSpec:
    """Object-plane transmission, selected by ``kind``.

    Only the parameters of the chosen kind are read: ``width`` for slits
    and wires, ``h`` for the letter, ``indices`` and ``waist`` for modes
    ((m, n) for Hermite-Gauss, (p, l) for Laguerre-Gauss), ``mask`` and
    ``pitch`` for rasters. ``inverted`` swaps 0 and 1 in binary masks.
    """

    kind: str
    width: Optional[float] = None
    h: HGeometry = field(default_factory=HGeometry)
    indices: Tuple[int, int] = (0, 0)
    waist: Optional[float] = None
    mask: Optional[np.ndarray] = None
    pitch: Optional[float] = None
    inverted: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown object kind {self.kind!r}")
        if self.kind in ("single_slit", "dark_wire") and not (self.width and self.width > 0):
            raise ValueError(f"{self.kind} needs a positive width")
        if self.kind in ("hg_mode", "lg_vortex"):
            if not (self.waist and self.waist > 0):
                raise ValueError(f"{self.kind} needs a positive waist")
            if self.kind == "hg_mode" and min(self.indices) < 0:
                raise ValueError("mode indices must be >= 0")
            if self.kind == "lg_vortex" and self.indices[0] < 0:
                raise ValueError("radial index must be >= 0")
        if self.kind == "raster_mask":
            if self.mask is None or np.asarray(self.mask).size == 0 or np.asarray(self.mask).ndim != 2:
                raise ValueError("raster mask must be a non-empty 2D array")
            if not (self.pitch and self.pitch > 0):
                raise ValueError("raster mask needs a positive pixel pitch")


def _binary(spec: ObjectSpec, grid: GridSpec) -> np.ndarray:
    mesh = grid.mesh()
    x = mesh[0]
    L = grid.L
    if spec.kind in ("single_slit", "dark_wire"):
        if spec.width / 2 > L[0]:
            raise ValueError("slit wider than the grid")
        m = np.abs(x) <= spec.width / 2
        if spec.kind == "dark_wire":
            m = ~m
        return m
    if grid.dims != 2:
        raise ValueError(f"{spec.kind} needs a 2D grid")
    y = mesh[1]
    if spec.kind == "h_with_cross":
        if spec.h.box / 2 > min(L):
            raise ValueError("H does not fit inside the grid")
        bright, dark = spec.h.rectangles()
        m = np.zeros(grid.shape, dtype=bool)
        for x0, x1, y0, y1 in bright:
            m |= (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        for x0, x1, y0, y1 in dark:
            m &= ~((x >= x0) & (x <= x1) & (y >= y0) & (y <= y1))
        return m
    # raster: row 0 is the top edge (largest y), column 0 the left edge
    mask = np.asarray(spec.mask) > 0.5
    rows, cols = mask.shape
    half_w, half_h = cols * spec.pitch / 2, rows * spec.pitch / 2
    if half_w > L[0] or half_h > L[1]:
        raise ValueError("raster mask larger than the grid")
    col = np.floor((x + half_w) / spec.pitch).astype(int)
    row = np.floor((half_h - y) / spec.pitch).astype(int)
    inside = (col >= 0) & (col < cols) & (row >= 0) & (row < rows)
    out = np.zeros(grid.shape, dtype=bool)
    out[inside] = mask[row[inside], col[inside]]
    return out


def make_object(spec: ObjectSpec, grid: GridSpec) -> ComplexField:
    """Sample an object transmission on an object-plane grid.

    Binary kinds give 0/1 masks, ``plane_wave`` gives ones, and the modes
    give complex profiles scaled to unit peak amplitude on the grid.
    Slits, wires and plane waves also accept 1D grids.
    """
    if spec.kind == "plane_wave":
        return ComplexField(grid, np.ones(grid.shape), "object")
    if spec.kind in BINARY_KINDS:
        m = _binary(spec, grid)
        if spec.inverted:
            m = ~m
        return ComplexField(grid, m.astype(float), "object")

    if grid.dims != 2:
        raise ValueError(f"{spec.kind} needs a 2D grid")
    if spec.waist > min(grid.L):
        raise ValueError("mode waist exceeds the grid half-width")
    x, y = grid.mesh()
    w = spec.waist
    r2 = x**2 + y**2
    gauss = np.exp(-r2 / w**2)
    if spec.kind == "hg_mode":
        m, n = spec.indices
        u = eval_hermite(m, math.sqrt(2) * x / w) * eval_hermite(n, math.sqrt(2) * y / w) * gauss
    else:
        p, l = spec.indices
        rho = 2 * r2 / w**2
        u = rho ** (abs(l) / 2) * eval_genlaguerre(p, abs(l), rho) * gauss * np.exp(1j * l * np.arctan2(y, x))
    return ComplexField(grid, u / np.abs(u).max(), "object")


def babinet_pair(spec: ObjectSpec) -> Tuple[ObjectSpec, ObjectSpec]:
    """Complementary screen and the unobstructed plane wave.

    ``make_object`` of the input plus the complement equals the plane wave
    at every sample.
    """
    if spec.kind not in BINARY_KINDS:
        raise ValueError(f"{spec.kind} is not a binary mask")
    plane = ObjectSpec("plane_wave")
    if spec.kind == "single_slit":
        return replace(spec, kind="dark_wire"), plane
    if spec.kind == "dark_wire":
        return replace(spec, kind="single_slit"), plane
    return replace(spec, inverted=not spec.inverted), plane


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    """Read a P2 or P5 graymap as floats in [0, 1] (divided by maxval)."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    # header: magic, width, height, maxval, with '#' comments allowed
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:pos].decode("ascii"))
    magic = tokens[0]
    width, height, maxval = (int(t) for t in tokens[1:])
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise ValueError("bad PGM dimensions or maxval")
    if magic == "P2":
        body = data[pos:].decode("ascii")
        body = "\n".join(line.split("#", 1)[0] for line in body.splitlines())
        vals = np.array(body.split(), dtype=np.int64)
    elif magic == "P5":
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        vals = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos).astype(np.int64)
    else:
        raise ValueError(f"unsupported PGM magic {magic!r}")
    if vals.size != width * height:
        raise ValueError("PGM pixel count does not match header")
    return vals.reshape(height, width) / maxval


def mask_from_pgm(path: Union[str, Path], pitch: float) -> ObjectSpec:
    """Raster object from a graymap, thresholded at half of maxval."""
    img = read_pgm(path)
    return ObjectSpec("raster_mask", mask=(img >= 0.5).astype(float), pitch=pitch)
