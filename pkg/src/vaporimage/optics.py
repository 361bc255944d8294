"""Ideal thin-lens Fourier transforms between the planes of a 4f system.

A lens of focal length ``f`` maps an input sampled with spacing ``dx`` onto
a conjugate plane with spacing ``lambda f / (n dx)``; the conjugate
coordinate of spatial frequency ``nu`` is ``x' = lambda f nu``. With the
half-cell grid convention both planes sample half-integer indices, which
makes the discrete transform

    F[j, i] = exp(-2 pi i (i - (n-1)/2) (j - (n-1)/2) / n) / sqrt(n)

unitary and symmetric, with F @ F equal to exact index reversal. Applying
it twice therefore point-reflects the object, as the 4f system does.

The quadratic phase of a slightly defocused transform plane is dropped;
that is valid while the vapor cell length is small against ``f``.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .field import ComplexField, GridSpec

ALIAS_FRACTION = 1e-3
_EDGE_SAMPLES = 2


class AliasingWarning(UserWarning):
    """Output sampling is too coarse for the input's spatial bandwidth."""


def fft_workers() -> int:
    """Thread count for FFTs, from ``VAPORIMAGE_THREADS`` (default 1).

    Results are deterministic for a fixed thread count.
    """
    try:
        return max(1, int(os.environ.get("VAPORIMAGE_THREADS", "1")))
    except ValueError:
        return 1


def _phase(n: int) -> np.ndarray:
    c = -(n - 1) / 2
    return np.exp(-2j * np.pi * c * np.arange(n) / n), np.exp(-2j * np.pi * c * (np.arange(n) + c) / n)


def centered_dft(values: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unitary half-index DFT over every axis of ``values``."""
    out = np.asarray(values, dtype=np.complex128)
    for ax, n in enumerate(out.shape):
        pre, post = _phase(n)
        shape = [1] * out.ndim
        shape[ax] = n
        if inverse:
            pre, post = np.conj(post), np.conj(pre)
            out = scipy.fft.ifft(out * pre.reshape(shape), axis=ax, norm="ortho", workers=fft_workers())
        else:
            out = scipy.fft.fft(out * pre.reshape(shape), axis=ax, norm="ortho", workers=fft_workers())
        out = out * post.reshape(shape)
    return out


def conjugate_grid(grid: GridSpec, f: float, wavelength: float) -> GridSpec:
    """Grid of the plane a lens maps ``grid`` onto."""
    return GridSpec(grid.n, tuple(wavelength * f / (2 * dx) for dx in grid.spacing))


@dataclass(frozen=True)
class LensMap:
    """One lens of the 4f system.

    ``stage`` 1 maps object -> transform plane, stage 2 transform -> image.
    """

    f: float
    wavelength: float
    stage: int = 1

    def __post_init__(self):
        if not (self.f > 0 and self.wavelength > 0):
            raise ValueError("focal length and wavelength must be positive")
        if self.stage not in (1, 2):
            raise ValueError("lens stage must be 1 or 2")

    @property
    def planes(self):
        return ("object", "transform") if self.stage == 1 else ("transform", "image")


def _edge_fraction(values: np.ndarray) -> float:
    p = np.abs(values) ** 2
    total = p.sum()
    if total == 0:
        return 0.0
    edge = np.zeros(p.shape, dtype=bool)
    for ax in range(p.ndim):
        idx = [slice(None)] * p.ndim
        idx[ax] = np.r_[0:_EDGE_SAMPLES, p.shape[ax] - _EDGE_SAMPLES : p.shape[ax]]
        edge[tuple(idx)] = True
    return float(p[edge].sum() / total)


def lens_transform(E: ComplexField, lens: LensMap) -> ComplexField:
    """Field in the back focal plane of ``lens``.

    Values are scaled by sqrt(dx / dx') per axis so that the Riemann-sum
    energy is conserved. Emits :class:`AliasingWarning` when more than
    0.1 % of the output energy sits in the two outermost samples of any
    axis edge, a sign that the input is undersampled.
    """
    src, dst = lens.planes
    if E.plane != src:
        raise ValueError(f"lens stage {lens.stage} expects a {src}-plane field, got {E.plane}")
    out_grid = conjugate_grid(E.grid, lens.f, lens.wavelength)
    scale = np.sqrt(np.prod(E.grid.spacing) / np.prod(out_grid.spacing))
    values = centered_dft(E.values) * scale
    frac = _edge_fraction(values)
    if frac > ALIAS_FRACTION:
        warnings.warn(
            f"{frac:.2e} of the {dst}-plane energy lies at the grid edge; refine the input sampling",
            AliasingWarning,
            stacklevel=2,
        )
    return ComplexField(out_grid, values, dst)


def image_4f(E_O: ComplexField, f: float, wavelength: float) -> ComplexField:
    """Image of an object through two identical lenses: E_O(-x, -y)."""
    tp = lens_transform(E_O, LensMap(f, wavelength, 1))
    return lens_transform(tp, LensMap(f, wavelength, 2))
