"""Invariant suite behind the ``validate`` scenario."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .diffusion import (
    beta_map,
    decay_image,
    diffuse_fd,
    diffuse_green_1d,
    diffuse_spectral,
    pipeline_image,
)
from .analysis import dark_region_check, default_1d_grid
from .field import ComplexField, DiffusionParams, energy, make_grid
from .optics import LensMap, image_4f, lens_transform
from .patterns import ObjectSpec, make_object, slit_pattern


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _gaussian(grid, w):
    x = grid.axis()
    return ComplexField(grid, np.exp(-(x**2) / w**2))


def run_validation(f: float, wavelength: float, a: float, D: float, tol: Dict[str, float]) -> List[Check]:
    checks = []
    alpha = math.pi * a / (f * wavelength)

    # 4f pipeline on the H object
    grid2 = make_grid(2, 512, 256e-6)
    obj = make_object(ObjectSpec("h_with_cross"), grid2)
    tp = lens_transform(obj, LensMap(f, wavelength, 1))
    img = lens_transform(tp, LensMap(f, wavelength, 2))
    for label, src, dst in (("lens 1", obj, tp), ("lens 2", tp, img)):
        checks.append(Check(f"parseval {label}", abs(energy(dst) - energy(src)) / energy(src), tol["parseval"]))
    checks.append(
        Check("image is point reflection", float(np.abs(img.values - obj.values[::-1, ::-1]).max()), 1e-9)
    )
    bmap = beta_map(img.grid, D, wavelength, f)
    params = DiffusionParams(D)
    for t in (0.5e-3, 1e-3, 2e-3):
        piped = pipeline_image(obj, f, wavelength, params, t)
        closed = decay_image(img, bmap, t)
        checks.append(Check(f"commutation t={t * 1e3:g} ms", rel_l2(piped.values, closed.values), tol["commutation"]))
        leak = dark_region_check(img, piped, tol["dark_leak"]).worst_leak
        checks.append(Check(f"dark region leak t={t * 1e3:g} ms", leak, tol["dark_leak"]))

    # 1D solvers on the slit-pattern grid
    grid1 = default_1d_grid(alpha)
    t1 = 1.0 / (D * alpha**2)
    cases = {"gaussian": _gaussian(grid1, 4 / alpha), "sinc": slit_pattern(alpha, 1.0, grid1)}
    for name, rho in cases.items():
        g = diffuse_green_1d(rho, D, t1)
        s = diffuse_spectral(rho, D, t1)
        fd = diffuse_fd(rho, D, t1)
        checks.append(Check(f"spectral vs green ({name})", rel_l2(s.values, g.values), tol["spectral_green"]))
        checks.append(Check(f"fd vs green ({name})", rel_l2(fd.values, g.values), tol["fd_green"]))

    gauss = cases["gaussian"]
    mass0 = gauss.values.sum().real
    for name, fn in (("spectral", diffuse_spectral), ("green", diffuse_green_1d)):
        m = fn(gauss, D, t1).values.sum().real
        checks.append(Check(f"mass conservation ({name})", abs(m - mass0) / abs(mass0), tol["mass"]))
        once = fn(gauss, D, 2 * t1)
        twice = fn(fn(gauss, D, 0.7 * t1), D, 1.3 * t1)
        checks.append(Check(f"semigroup ({name})", rel_l2(twice.values, once.values), tol["semigroup"]))
    return checks
