"""Fidelity curves, dark-spot tracking, point probes and dark-region checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .diffusion import BetaMap, ImageDecay, diffuse_fd, diffuse_green_1d, diffuse_spectral
from .field import ComplexField, GridMismatchError, OpticalParams, make_grid, normalize
from .patterns import artificial_pattern, slit_pattern

DEFAULT_FLOOR = 1e-3
_REAL_TOL = 1e-9


@dataclass(frozen=True)
class FidelityCurve:
    times: np.ndarray
    values: np.ndarray


def fidelity(
    E_I0: ComplexField,
    bmap: BetaMap,
    times: Sequence[float],
    quadrature: str = "cell",
    renormalize: bool = False,
) -> FidelityCurve:
    """FI(t) = |<Psi0|Psi(t)>|^2 with Psi0 = E_I0 normalized and Psi(t) = Psi0 exp(-beta t).

    Psi(t) is not renormalized, so FI also drops with the total energy the
    image loses. ``renormalize=True`` gives the shape-only overlap instead.

    ``quadrature="midpoint"`` takes beta at cell centers and equals
    ``inner_product(Psi0, decay_image(Psi0, bmap, t))`` squared. The default
    ``"cell"`` integrates exp(-beta t) exactly over each cell, treating
    |Psi0|^2 as constant per cell; for masks whose edges lie on cell
    boundaries that is the exact continuous integral.
    """
    if E_I0.grid != bmap.grid:
        raise GridMismatchError("beta map and image live on different grids")
    if quadrature not in ("cell", "midpoint"):
        raise ValueError("quadrature must be 'cell' or 'midpoint'")
    psi0 = normalize(E_I0)
    weight = np.abs(psi0.values) ** 2 * E_I0.grid.cell_area
    out = []
    for t in times:
        if t < 0:
            raise ValueError("times must be non-negative")
        if quadrature == "cell":
            d = bmap.cell_averaged_decay(t)
            d2 = bmap.cell_averaged_decay(2 * t) if renormalize else None
        else:
            d = np.exp(-bmap.values * t)
            d2 = d * d if renormalize else None
        overlap = float(np.sum(weight * d))
        fi = overlap**2
        if renormalize:
            fi /= float(np.sum(weight * d2))
        out.append(fi)
    return FidelityCurve(np.asarray(times, dtype=float), np.asarray(out))


def find_zero_crossings(field: ComplexField, window: Tuple[float, float]) -> np.ndarray:
    """Sign changes of Re(field) inside ``window``, linearly interpolated, ascending.

    A sample that is exactly zero counts only if its neighbors have opposite
    signs, so tangential zeros are not crossings.
    """
    if field.grid.dims != 1:
        raise ValueError("zero crossings need a 1D field")
    v = field.values
    peak = np.abs(v).max()
    if peak > 0 and np.abs(v.imag).max() > _REAL_TOL * peak:
        raise ValueError("field is not real")
    lo, hi = window
    if not lo < hi:
        raise ValueError("empty window")
    x = field.grid.axis()
    sel = (x >= lo) & (x <= hi)
    xs, r = x[sel], v.real[sel]
    s = np.sign(r)
    out = []
    i = 0
    while i < len(r) - 1:
        if s[i] * s[i + 1] < 0:
            out.append(xs[i] - r[i] * (xs[i + 1] - xs[i]) / (r[i + 1] - r[i]))
        elif s[i + 1] == 0:
            j = i + 1
            while j < len(r) and s[j] == 0:
                j += 1
            if j < len(r) and s[i] * s[j] < 0:
                out.append(0.5 * (xs[i + 1] + xs[j - 1]))
            i = j - 1
        i += 1
    return np.asarray(out)


@dataclass(frozen=True)
class DarkSpotReport:
    """Crossings, relative minimum intensity and lifetime of one dark spot.

    ``min_intensity[k]`` is the minimum of |rho|^2 in the window divided by
    the global maximum at ``times[k]``. ``lifetime`` is the first sampled
    time at which the spot is gone, or None if it survives every sample.
    """

    times: np.ndarray
    crossings: Tuple[np.ndarray, ...]
    min_intensity: np.ndarray
    relative_floor: float
    lifetime: Optional[float]

    def alive(self) -> np.ndarray:
        has_cross = np.array([len(c) > 0 for c in self.crossings])
        return has_cross | (self.min_intensity <= self.relative_floor)


def _solve(rho0, D, t, method):
    if method == "green":
        return diffuse_green_1d(rho0, D, t)
    if method == "fd":
        return diffuse_fd(rho0, D, t)
    return diffuse_spectral(rho0, D, t)


def default_1d_grid(alpha: float, n: int = 4096, lobes: float = 40.0):
    """n samples over |alpha x| <= lobes * pi."""
    return make_grid(1, n, lobes * math.pi / alpha)


def dark_spot_metrics(
    kind: str,
    optics: OpticalParams,
    D: float,
    times: Sequence[float],
    window: Tuple[float, float],
    relative_floor: float = DEFAULT_FLOOR,
    grid=None,
    method: str = "spectral",
) -> DarkSpotReport:
    """Track the dark spot of the slit (``"sinc"``) or ``"artificial"`` pattern.

    ``window`` is in meters. The spot counts as gone at the first time with
    no sign change in the window and a window minimum above
    ``relative_floor`` times the global peak intensity.
    """
    lo, hi = window
    if not lo < hi:
        raise ValueError("empty window")
    alpha = optics.alpha
    if grid is None:
        grid = default_1d_grid(alpha)
    if kind == "sinc":
        rho0 = slit_pattern(alpha, optics.C, grid)
    elif kind == "artificial":
        rho0 = artificial_pattern(alpha, optics.w, optics.C, grid)
    else:
        raise ValueError("kind must be 'sinc' or 'artificial'")
    x = grid.axis()
    sel = (x >= lo) & (x <= hi)
    if not sel.any():
        raise ValueError("window contains no samples")
    crossings, mins = [], []
    lifetime = None
    for t in times:
        rho = _solve(rho0, D, t, method)
        c = find_zero_crossings(rho, window)
        inten = rho.intensity
        m = float(inten[sel].min() / inten.max())
        crossings.append(c)
        mins.append(m)
        if lifetime is None and len(c) == 0 and m > relative_floor:
            lifetime = float(t)
    return DarkSpotReport(np.asarray(times, dtype=float), tuple(crossings), np.asarray(mins), relative_floor, lifetime)


@dataclass(frozen=True)
class ProbeSeries:
    """Intensity at labeled image-plane points; ``intensity[p, k]`` is point p at times[k]."""

    labels: Tuple[str, ...]
    points: Tuple[Tuple[float, float], ...]
    times: np.ndarray
    intensity: np.ndarray

    def decay_rates(self) -> Dict[str, float]:
        """Least-squares slope of log intensity against t, per point (nan if dark)."""
        out = {}
        for lab, row in zip(self.labels, self.intensity):
            if len(self.times) < 2 or np.any(row <= 0):
                out[lab] = float("nan")
                continue
            out[lab] = float(np.polyfit(self.times, np.log(row), 1)[0])
        return out


def probe_intensity(
    source: Union[ImageDecay, Sequence[ComplexField]],
    points: Dict[str, Tuple[float, float]],
    times: Sequence[float],
) -> ProbeSeries:
    """Sample |E|^2 at named points over time.

    With a list of fields (one per time) the nearest sample is read. With an
    :class:`ImageDecay` the initial intensity comes from the nearest sample
    and the decay uses beta at the exact point, I0 exp(-2 beta t).
    """
    times = np.asarray(times, dtype=float)
    labels = tuple(points)
    pts = tuple(tuple(points[k]) for k in labels)
    if isinstance(source, ImageDecay):
        grid = source.initial.grid
        idx = [grid.nearest_index(p) for p in pts]
        rows = []
        for i, p in zip(idx, pts):
            i0 = abs(source.initial.values[i]) ** 2
            rows.append(i0 * np.exp(-2 * source.bmap.rate_at(p) * times))
        return ProbeSeries(labels, pts, times, np.array(rows).reshape(len(pts), len(times)))
    fields = list(source)
    if len(fields) != len(times):
        raise ValueError("need one field per time")
    if not fields:
        return ProbeSeries(labels, pts, times, np.zeros((len(pts), 0)))
    grid = fields[0].grid
    idx = [grid.nearest_index(p) for p in pts]
    data = np.array([[f.intensity[i] for f in fields] for i in idx]).reshape(len(pts), len(times))
    return ProbeSeries(labels, pts, times, data)


@dataclass(frozen=True)
class DarkRegionResult:
    passed: bool
    worst_leak: float
    dark_samples: int


def dark_region_check(E_I0: ComplexField, E_It: ComplexField, eps: float = 1e-5) -> DarkRegionResult:
    """Does light stay out of the dark part of the image?

    Dark samples are those with |E_I0| <= eps * max|E_I0|. Passes iff all of
    them keep |E_It| <= eps * max|E_I0|. ``worst_leak`` is the largest
    |E_It| over dark samples, relative to max|E_I0|.
    """
    if E_I0.grid != E_It.grid:
        raise GridMismatchError("fields live on different grids")
    peak = np.abs(E_I0.values).max()
    if peak == 0:
        raise ValueError("initial image is identically zero")
    dark = np.abs(E_I0.values) <= eps * peak
    if not dark.any():
        return DarkRegionResult(True, 0.0, 0)
    leak = float(np.abs(E_It.values[dark]).max() / peak)
    return DarkRegionResult(leak <= eps, leak, int(dark.sum()))
