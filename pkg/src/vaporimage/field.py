"""Sampling grids, complex fields and the discrete inner product.

Every grid is uniform and centered on the optical axis with a half-cell
offset: sample ``i`` of an axis with ``n`` points and half-width ``L`` sits at

    x_i = -L + (i + 1/2) * dx,    dx = 2 L / n

so even grids are mirror symmetric and never place a sample on the axis.
2D arrays are indexed ``values[ix, iy]`` (axis 0 is x).

All quantities are SI. Field amplitudes are dimensionless; only ratios and
shapes carry physical meaning.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

PLANES = ("object", "transform", "image")

Number = Union[int, float]


class GridMismatchError(ValueError):
    """Two fields that must share a lattice do not."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform centered lattice in 1 or 2 dimensions.

    ``n`` and ``L`` hold one entry per axis: sample count and physical
    half-width in meters.
    """

    n: Tuple[int, ...]
    L: Tuple[float, ...]

    def __post_init__(self):
        if len(self.n) not in (1, 2) or len(self.n) != len(self.L):
            raise ValueError("grid must have 1 or 2 axes with one n and one L each")
        for n in self.n:
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"samples per axis must be an even integer >= 8, got {n}")
        for L in self.L:
            if not (L > 0 and math.isfinite(L)):
                raise ValueError(f"half-width must be positive and finite, got {L}")

    @property
    def dims(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(int(n) for n in self.n)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(2.0 * L / n for n, L in zip(self.n, self.L))

    @property
    def cell_area(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, k: int = 0) -> np.ndarray:
        """Sample coordinates along axis ``k``."""
        n, L = self.n[k], self.L[k]
        dx = 2.0 * L / n
        # half-integer offsets are exact, so x[n-1-i] == -x[i] bit for bit
        return (np.arange(n) - (n - 1) / 2) * dx

    def axes(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.axis(k) for k in range(self.dims))

    def mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def radius2(self) -> np.ndarray:
        """Squared distance from the axis for every sample."""
        return sum(c**2 for c in self.mesh())

    def nearest_index(self, point: Sequence[float]) -> Tuple[int, ...]:
        """Index of the sample whose cell contains ``point``.

        Points on a cell boundary go to the upper cell.
        """
        if len(point) != self.dims:
            raise ValueError(f"point has {len(point)} coordinates, grid has {self.dims} axes")
        idx = []
        for p, n, L, dx in zip(point, self.n, self.L, self.spacing):
            if not (-L <= p <= L):
                raise ValueError(f"point {tuple(point)} lies outside the grid")
            idx.append(min(int(math.floor((p + L) / dx)), n - 1))
        return tuple(idx)

    def padded(self, factor: int = 2) -> "GridSpec":
        """Grid with the same spacing and ``factor`` times the extent."""
        return GridSpec(tuple(n * factor for n in self.n), tuple(L * factor for L in self.L))


def make_grid(dims: int, n: Union[int, Sequence[int]], L: Union[Number, Sequence[Number]]) -> GridSpec:
    """Build a centered grid; scalar ``n`` and ``L`` apply to every axis.

    >>> g = make_grid(1, 8, 4.0)
    >>> g.spacing, g.axis()[0], g.axis()[-1]
    ((1.0,), -3.5, 3.5)
    """
    if dims not in (1, 2):
        raise ValueError(f"dims must be 1 or 2, got {dims}")
    ns = (n,) * dims if np.isscalar(n) else tuple(n)
    Ls = (L,) * dims if np.isscalar(L) else tuple(L)
    if len(ns) != dims or len(Ls) != dims:
        raise ValueError("per-axis n and L must match dims")
    return GridSpec(tuple(int(v) if int(v) == v else v for v in ns), tuple(float(v) for v in Ls))


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples on a grid, tagged with the plane they live in.

    The same type carries the object field, the transform-plane pattern,
    the stored Raman coherence and the image-plane wave function.
    """

    grid: GridSpec
    values: np.ndarray
    plane: str = "transform"

    def __post_init__(self):
        if self.plane not in PLANES:
            raise ValueError(f"plane must be one of {PLANES}, got {self.plane!r}")
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains NaN or Inf")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def replace(self, values=None, plane=None) -> "ComplexField":
        return ComplexField(
            self.grid,
            self.values if values is None else values,
            self.plane if plane is None else plane,
        )

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def _check(self, other: "ComplexField"):
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")

    def __add__(self, other: "ComplexField") -> "ComplexField":
        self._check(other)
        return self.replace(self.values + other.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        self._check(other)
        return self.replace(self.values - other.values)

    def __mul__(self, scalar: complex) -> "ComplexField":
        return self.replace(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexField":
        return self.replace(-self.values)


@dataclass(frozen=True)
class OpticalParams:
    """Geometry of the 4f system and the 1D test patterns.

    f: focal length, wavelength, a: slit width, w: pulse width (all in m);
    C: pattern amplitude.
    """

    f: float
    wavelength: float
    a: float
    w: float
    C: float = 1.0

    def __post_init__(self):
        for name in ("f", "wavelength", "a", "w"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def alpha(self) -> float:
        """Transverse wavenumber of the slit pattern, pi a / (f lambda)."""
        return math.pi * self.a / (self.f * self.wavelength)


@dataclass(frozen=True)
class DiffusionParams:
    """Diffusion coefficient (m^2/s) and the storage coupling constants."""

    D: float
    g: float = 1.0
    omega13: float = 1.0

    def __post_init__(self):
        if not self.D >= 0:
            raise ValueError("diffusion coefficient must be non-negative")
        if self.omega13 == 0:
            raise ValueError("coupling Rabi frequency must be nonzero")


def inner_product(a: ComplexField, b: ComplexField) -> complex:
    """Riemann-sum overlap sum(conj(a) * b) * cell_area.

    Conjugate-linear in ``a``. The sum is numpy's pairwise reduction over the
    flattened arrays in C order, so ``inner_product(a, a)`` and
    :func:`energy` agree bit for bit.
    """
    if a.grid != b.grid:
        raise GridMismatchError("inner product of fields on different grids")
    return complex(np.sum(np.conj(a.values) * b.values) * a.grid.cell_area)


def energy(a: ComplexField) -> float:
    return inner_product(a, a).real


def normalize(a: ComplexField) -> ComplexField:
    """Scale ``a`` to unit norm under :func:`inner_product`."""
    e = energy(a)
    if not e > 0:
        raise ValueError("cannot normalize a zero field")
    return a.replace(a.values / math.sqrt(e))
