"""Storage of a field as Raman coherence and its evolution under diffusion.

Three independent solvers of d(rho)/dt = D laplacian(rho) are provided:

* :func:`diffuse_green_1d` convolves with the heat kernel by direct
  quadrature (1D reference),
* :func:`diffuse_spectral` multiplies the spectrum by exp(-D k^2 t) (1D and
  2D production path),
* :func:`diffuse_fd` is a Crank-Nicolson oracle.

In the image plane, diffusion in the transform plane reduces to a pointwise
decay exp(-beta t) with beta = D (2 pi)^2 (x^2 + y^2) / (lambda f)^2, see
:func:`beta_map` and :func:`decay_image`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import scipy.fft
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from scipy.special import erfc

from .field import ComplexField, DiffusionParams, GridMismatchError, GridSpec, energy
from .optics import LensMap, centered_dft, fft_workers, lens_transform

KERNEL_SIGMAS = 8.0
WRAP_TOLERANCE = 1e-8
ENERGY_GROWTH_LIMIT = 1e-6
BOUNDARIES = ("padded", "periodic", "antiperiodic")


class WrapAroundError(RuntimeError):
    """Diffusion would carry energy across the zero padding of a periodic solve."""


class InstabilityError(RuntimeError):
    """Finite-difference energy grew between steps."""


def store_coherence(E: ComplexField, params: DiffusionParams) -> ComplexField:
    """Raman coherence -(g / Omega13) E left behind when the coupling light is switched off."""
    if params.omega13 == 0:
        raise ValueError("coupling Rabi frequency must be nonzero")
    return E * (-params.g / params.omega13)


def retrieve_field(rho: ComplexField, params: DiffusionParams) -> ComplexField:
    """Inverse of :func:`store_coherence`."""
    if params.g == 0:
        raise ValueError("coupling constant g must be nonzero to retrieve")
    return rho * (-params.omega13 / params.g)


def _check_time(D: float, t: float):
    if not (D >= 0 and t >= 0):
        raise ValueError("D and t must be non-negative")


def diffuse_green_1d(rho0: ComplexField, D: float, t: float) -> ComplexField:
    """Convolve a 1D field with the heat kernel (4 pi D t)^(-1/2) exp(-x^2 / 4Dt).

    Direct Riemann quadrature over the grid, values outside the grid taken
    as zero, kernel cut at 8 standard deviations (tail mass below 1e-14).
    The kernel should be resolved by the grid (sqrt(2Dt) of a few samples).
    """
    _check_time(D, t)
    if rho0.grid.dims != 1:
        raise ValueError("Green quadrature is 1D only")
    if t == 0 or D == 0:
        return rho0
    n = rho0.grid.n[0]
    dx = rho0.grid.spacing[0]
    sigma = math.sqrt(2 * D * t)
    if sigma < dx:
        warnings.warn("heat kernel narrower than one grid cell; quadrature is inaccurate", stacklevel=2)
    m = min(int(math.ceil(KERNEL_SIGMAS * sigma / dx)), n - 1)
    s = np.arange(-m, m + 1) * dx
    kernel = dx * np.exp(-(s**2) / (4 * D * t)) / math.sqrt(4 * math.pi * D * t)
    full = np.convolve(rho0.values, kernel, mode="full")
    return rho0.replace(full[m : m + n])


def _angular_freqs(n: int, dx: float, boundary: str) -> np.ndarray:
    if boundary == "antiperiodic":
        return 2 * np.pi * (np.arange(n) - (n - 1) / 2) / (n * dx)
    return 2 * np.pi * scipy.fft.fftfreq(n, dx)


def _k2(shape, spacing, boundary) -> np.ndarray:
    ks = [_angular_freqs(n, dx, boundary) for n, dx in zip(shape, spacing)]
    return sum(k**2 for k in np.meshgrid(*ks, indexing="ij"))


def wrap_fraction(grid: GridSpec, D: float, t: float) -> float:
    """Heat-kernel mass that crosses a zero pad as wide as the grid itself."""
    if t == 0 or D == 0:
        return 0.0
    return float(max(erfc(L / math.sqrt(4 * D * t)) for L in grid.L))


def diffuse_spectral(rho0: ComplexField, D: float, t: float, boundary: str = "padded") -> ComplexField:
    """Diffuse by multiplying the discrete spectrum with exp(-D k^2 t).

    ``boundary`` picks the discrete extension of the sampled field:

    ``"padded"``
        zero-pad to twice the extent per axis, periodic FFT, crop. Matches
        the free-space solution for fields that vanish near the grid edge.
        Raises :class:`WrapAroundError` when more than 1e-8 of the kernel
        mass would cross the pad.
    ``"periodic"``
        periodic FFT on the grid itself.
    ``"antiperiodic"``
        half-index spectrum, the basis diagonalized by
        :func:`~vaporimage.optics.lens_transform`. Use this for
        transform-plane fields produced by a lens, whose sampled spectrum is
        exactly the object grid.
    """
    _check_time(D, t)
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}")
    if t == 0 or D == 0:
        return rho0
    grid = rho0.grid
    if boundary == "antiperiodic":
        mult = np.exp(-D * t * _k2(grid.shape, grid.spacing, boundary))
        return rho0.replace(centered_dft(mult * centered_dft(rho0.values), inverse=True))

    values = rho0.values
    if boundary == "padded":
        frac = wrap_fraction(grid, D, t)
        if frac > WRAP_TOLERANCE:
            raise WrapAroundError(f"wrap-around mass {frac:.2e} exceeds {WRAP_TOLERANCE:.0e}; enlarge the grid")
        pad = [(n // 2, n // 2) for n in grid.shape]
        values = np.pad(values, pad)
    shape = values.shape
    mult = np.exp(-D * t * _k2(shape, grid.spacing, "periodic"))
    axes = tuple(range(values.ndim))
    w = fft_workers()
    if not np.any(values.imag):
        # real input: real transform keeps the output exactly real
        spec = scipy.fft.rfftn(values.real, axes=axes, workers=w)
        out = scipy.fft.irfftn(spec * mult[..., : spec.shape[-1]], s=shape, axes=axes, workers=w)
    else:
        out = scipy.fft.ifftn(scipy.fft.fftn(values, axes=axes, workers=w) * mult, axes=axes, workers=w)
    if boundary == "padded":
        out = out[tuple(slice(n // 2, n // 2 + n) for n in grid.shape)]
    return rho0.replace(out)


def _laplacian(shape, spacing) -> sp.csc_matrix:
    ops = []
    for n, dx in zip(shape, spacing):
        ops.append(sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n)) / dx**2)
    if len(ops) == 1:
        return ops[0].tocsc()
    ix, iy = (sp.identity(n) for n in shape)
    return (sp.kron(ops[0], iy) + sp.kron(ix, ops[1])).tocsc()


def default_fd_steps(grid: GridSpec, D: float, t: float) -> int:
    """Steps for dt = min(t / 64, dx^2 / (4 D))."""
    if t == 0 or D == 0:
        return 0
    dt = min(t / 64, min(grid.spacing) ** 2 / (4 * D))
    return int(math.ceil(t / dt - 1e-9))


def diffuse_fd(rho0: ComplexField, D: float, t: float, steps: int | None = None) -> ComplexField:
    """Crank-Nicolson solve on the 2x zero-padded grid with zero Dirichlet walls.

    Second order in space and time. 2D grids build a sparse LU of the full
    five-point operator, so keep them small (a few hundred samples per axis).
    Raises :class:`InstabilityError` if the discrete energy grows by more
    than 1e-6 in one step.
    """
    _check_time(D, t)
    if t == 0 or D == 0:
        return rho0
    grid = rho0.grid
    if steps is None:
        steps = default_fd_steps(grid, D, t)
    if steps < 1:
        raise ValueError("need at least one time step")
    dt = t / steps
    pad = [(n // 2, n // 2) for n in grid.shape]
    u = np.pad(rho0.values, pad)
    shape = u.shape
    lap = _laplacian(shape, grid.spacing)
    eye = sp.identity(lap.shape[0], format="csc")
    lu = splu((eye - 0.5 * dt * D * lap).tocsc())
    rhs_op = (eye + 0.5 * dt * D * lap).tocsr()

    u = u.ravel()
    e_prev = float(np.vdot(u, u).real)
    for _ in range(steps):
        r = rhs_op @ u
        u = lu.solve(np.ascontiguousarray(r.real)) + 1j * lu.solve(np.ascontiguousarray(r.imag))
        e = float(np.vdot(u, u).real)
        if e > e_prev * (1 + ENERGY_GROWTH_LIMIT):
            raise InstabilityError(f"energy grew from {e_prev:.6e} to {e:.6e}")
        e_prev = e
    u = u.reshape(shape)[tuple(slice(n // 2, n // 2 + n) for n in grid.shape)]
    return rho0.replace(u)


@dataclass(frozen=True)
class EvolutionResult:
    times: Tuple[float, ...]
    fields: Tuple[ComplexField, ...]
    method: str

    def __post_init__(self):
        if len(self.times) != len(self.fields):
            raise ValueError("one field per time")
        if any(t < 0 for t in self.times) or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be non-negative and strictly increasing")
        if len({f.grid for f in self.fields}) > 1:
            raise ValueError("all fields must share a grid")


def evolve(rho0: ComplexField, D: float, times: Sequence[float], method: str = "spectral", **kwargs) -> EvolutionResult:
    """Diffuse ``rho0`` to every time in ``times`` with the named solver."""
    solvers = {
        "green": diffuse_green_1d,
        "spectral": diffuse_spectral,
        "fd": diffuse_fd,
    }
    if method not in solvers:
        raise ValueError(f"method must be one of {sorted(solvers)}")
    fn = solvers[method]
    fields = tuple(fn(rho0, D, t, **kwargs) for t in times)
    return EvolutionResult(tuple(float(t) for t in times), fields, method)


def _beta_coefficient(D: float, wavelength: float, f: float) -> float:
    return D * (2 * math.pi) ** 2 / (wavelength * f) ** 2


@dataclass(frozen=True, eq=False)
class BetaMap:
    """Image-plane decay rates beta(x, y) in 1/s, sampled at cell centers."""

    grid: GridSpec
    D: float
    wavelength: float
    f: float
    values: np.ndarray

    @property
    def coefficient(self) -> float:
        """beta / r^2 in 1/(s m^2)."""
        return _beta_coefficient(self.D, self.wavelength, self.f)

    def rate_at(self, point: Sequence[float]) -> float:
        """beta evaluated exactly at ``point`` rather than at a sample."""
        return self.coefficient * float(sum(p * p for p in point))

    def cell_averaged_decay(self, t: float) -> np.ndarray:
        """Mean of exp(-beta t) over each grid cell, integrated exactly.

        exp(-c (x^2 + y^2)) factorizes, so each cell mean is a product of
        1D erf differences.
        """
        c = self.coefficient * t
        if c == 0:
            return np.ones(self.grid.shape)
        out = None
        sc = math.sqrt(c)
        for x, dx in zip(self.grid.axes(), self.grid.spacing):
            ax = np.abs(x)
            # erfc differences keep precision far from the axis
            seg = (erfc(sc * (ax - dx / 2)) - erfc(sc * (ax + dx / 2))) * math.sqrt(math.pi) / (2 * sc * dx)
            out = seg if out is None else np.multiply.outer(out, seg)
        return out


def beta_map(grid: GridSpec, D: float, wavelength: float, f: float) -> BetaMap:
    """beta = D (2 pi)^2 (x^2 + y^2) / (lambda f)^2 at every image-plane sample."""
    if not (D >= 0 and wavelength > 0 and f > 0):
        raise ValueError("need D >= 0 and positive wavelength and focal length")
    values = _beta_coefficient(D, wavelength, f) * grid.radius2()
    values.setflags(write=False)
    return BetaMap(grid, D, wavelength, f, values)


def decay_image(E_I0: ComplexField, bmap: BetaMap, t: float) -> ComplexField:
    """Closed-form image at time ``t``: E_I0 * exp(-beta t), sample by sample.

    Multiplication by a positive real keeps every phase and every zero.
    """
    if E_I0.grid != bmap.grid:
        raise GridMismatchError("beta map and image live on different grids")
    if E_I0.plane != "image":
        raise ValueError(f"expected an image-plane field, got {E_I0.plane}")
    if t < 0:
        raise ValueError("t must be non-negative")
    return E_I0.replace(E_I0.values * np.exp(-bmap.values * t))


@dataclass(frozen=True)
class ImageDecay:
    """Closed-form image evolution: an initial image plus its beta map."""

    initial: ComplexField
    bmap: BetaMap

    def at(self, t: float) -> ComplexField:
        return decay_image(self.initial, self.bmap, t)


def pipeline_image(E_O: ComplexField, f: float, wavelength: float, params: DiffusionParams, t: float) -> ComplexField:
    """Full storage route: lens, store, diffuse in the transform plane, retrieve, lens.

    Transform-plane diffusion uses the lens-diagonal (antiperiodic)
    spectrum, so the result agrees with :func:`decay_image` to rounding.
    """
    tp = lens_transform(E_O, LensMap(f, wavelength, 1))
    rho = store_coherence(tp, params)
    rho_t = diffuse_spectral(rho, params.D, t, boundary="antiperiodic")
    return lens_transform(retrieve_field(rho_t, params), LensMap(f, wavelength, 2))
