"""Command-line runner for the storage/diffusion scenarios.

    vaporimage <scenario> [--config FILE] --out DIR [--override key=value ...]

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 configuration
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Tuple

import numpy as np

from . import io
from .analysis import dark_region_check, dark_spot_metrics, fidelity, find_zero_crossings, probe_intensity
from .config import SCENARIOS, ConfigError, ExperimentConfig, parse_config
from .diffusion import (
    ImageDecay,
    beta_map,
    decay_image,
    diffuse_fd,
    diffuse_green_1d,
    diffuse_spectral,
    pipeline_image,
    retrieve_field,
    store_coherence,
)
from .field import DiffusionParams, OpticalParams, make_grid
from .optics import image_4f
from .patterns import HGeometry, ObjectSpec, artificial_pattern, make_object, mask_from_pgm, slit_pattern
from .validation import rel_l2, run_validation

log = logging.getLogger("vaporimage")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

PAPER = {"f": 0.25, "wavelength": 795e-9, "a": 100e-6, "D": 1.5e-4}
DEFAULT_WINDOWS = {"sinc": (0.5, 1.9), "artificial": (0.8, 1.2)}

Verdict = Tuple[str, bool, str]


def _solve(rho, D, t, method):
    if method == "green":
        return diffuse_green_1d(rho, D, t)
    if method == "fd":
        return diffuse_fd(rho, D, t)
    return diffuse_spectral(rho, D, t)


def _optics(cfg: ExperimentConfig) -> OpticalParams:
    alpha = math.pi * cfg.a / (cfg.f * cfg.wavelength)
    w = (cfg.w_inv_alpha or math.sqrt(20)) / alpha
    return OpticalParams(cfg.f, cfg.wavelength, cfg.a, w, cfg.C)


def _run_1d(cfg: ExperimentConfig, out: Path, kind: str) -> List[Verdict]:
    optics = _optics(cfg)
    alpha = optics.alpha
    L = cfg.L if cfg.L is not None else 40 * math.pi / alpha
    grid = make_grid(1, cfg.n or 4096, L)
    params = DiffusionParams(cfg.D, cfg.g, cfg.omega13)
    if kind == "sinc":
        E = slit_pattern(alpha, optics.C, grid)
    else:
        E = artificial_pattern(alpha, optics.w, optics.C, grid)
    rho0 = store_coherence(E, params)
    verdicts: List[Verdict] = []
    back = retrieve_field(rho0, params)
    verdicts.append(("storage round trip", bool(np.allclose(back.values, E.values, rtol=0, atol=1e-15)), ""))

    win = tuple(v * math.pi / alpha for v in (cfg.window or DEFAULT_WINDOWS[kind]))
    fields = [_solve(rho0, cfg.D, t, cfg.method) for t in cfg.times]
    rows_x = []
    cross_rows, spot_rows = [], []
    for k, (t, rho) in enumerate(zip(cfg.times, fields)):
        io.write_field_csv(out / f"rho_t{k:03d}.csv", rho)
        rows_x.append(rho.intensity)
    report = dark_spot_metrics(kind, optics, cfg.D, cfg.times, win, cfg.relative_floor, grid, cfg.method)
    alive = report.alive()
    for k, t in enumerate(cfg.times):
        c = report.crossings[k]
        first = c[0] if len(c) else float("nan")
        cross_rows.append((t, cfg.D * alpha**2 * t, len(c), first, first * alpha / math.pi))
        spot_rows.append((t, cfg.D * alpha**2 * t, report.min_intensity[k], bool(alive[k])))
    io.write_table(out / "crossings.csv", ["t_s", "D_alpha2_t", "n_crossings", "first_crossing_m", "first_alphax_over_pi"], cross_rows)
    io.write_table(out / "dark_spot.csv", ["t_s", "D_alpha2_t", "min_rel_intensity", "alive"], spot_rows)
    if rows_x:
        io.write_pgm(out / "intensity_xt.pgm", np.array(rows_x))

    t2 = 2.0 / (cfg.D * alpha**2) if cfg.D > 0 else 0.0
    rho2 = _solve(rho0, cfg.D, t2, cfg.method)
    if kind == "sinc":
        c2 = find_zero_crossings(rho2, (math.pi / alpha, 2 * math.pi / alpha))
        detail = f"t = {t2 * 1e6:.1f} us, x1 = {c2[0] * alpha / math.pi:.4f} pi/alpha" if len(c2) else f"t = {t2 * 1e6:.1f} us"
        verdicts.append(("crossing alive at Dα²t = 2", len(c2) > 0, detail))
        firsts = [r[3] for r in cross_rows if not math.isnan(r[3])]
        verdicts.append(("crossings move outward", all(b >= a for a, b in zip(firsts, firsts[1:])), ""))
    else:
        sel = (grid.axis() >= win[0]) & (grid.axis() <= win[1])
        rel = float(rho2.intensity[sel].min() / rho2.intensity.max())
        gone = len(find_zero_crossings(rho2, win)) == 0 and rel > cfg.relative_floor
        verdicts.append(("dark spot gone by Dα²t = 2", gone, f"min/peak = {rel:.3e}"))
        # stored coherence is -(g/Omega) E, so compare with the sign of the input
        sign = np.sign(rho0.values.real.sum()) or 1.0
        ok = all(float((sign * f.values.real).min()) >= -1e-12 * float(np.abs(f.values).max()) for f in fields)
        verdicts.append(("no sign change (in-phase pattern)", ok, ""))
    return verdicts


def _object(cfg: ExperimentConfig, grid):
    geo = cfg.geometry
    kind = cfg.object
    if kind == "raster_mask":
        if not cfg.pgm_path or "pixel_um" not in geo:
            raise ConfigError("raster_mask needs pgm_path and pixel_um")
        spec = mask_from_pgm(cfg.pgm_path, geo["pixel_um"])
    elif kind in ("single_slit", "dark_wire"):
        if "slit_width_um" not in geo:
            raise ConfigError(f"{kind} needs slit_width_um")
        spec = ObjectSpec(kind, width=geo["slit_width_um"])
    elif kind == "h_with_cross":
        d = HGeometry()
        h = HGeometry(
            geo.get("h_box_um", d.box),
            geo.get("h_stroke_um", d.stroke),
            geo.get("h_bar_um", d.bar),
            geo.get("h_cross_width_um", d.cross_width),
            geo.get("h_cross_arm_um", d.cross_arm),
        )
        spec = ObjectSpec(kind, h=h)
    elif kind in ("hg_mode", "lg_vortex"):
        if "waist_um" not in geo:
            raise ConfigError(f"{kind} needs waist_um")
        spec = ObjectSpec(kind, indices=cfg.mode_indices, waist=geo["waist_um"])
    else:
        spec = ObjectSpec(kind)
    if cfg.inverted:
        spec = replace(spec, inverted=True)
    return make_object(spec, grid)


def _image_setup(cfg: ExperimentConfig):
    grid = make_grid(2, cfg.n or 512, cfg.L if cfg.L is not None else 256e-6)
    obj = _object(cfg, grid)
    img0 = image_4f(obj, cfg.f, cfg.wavelength)
    bmap = beta_map(img0.grid, cfg.D, cfg.wavelength, cfg.f)
    return obj, img0, bmap


def _run_image(cfg: ExperimentConfig, out: Path) -> List[Verdict]:
    obj, img0, bmap = _image_setup(cfg)
    params = DiffusionParams(cfg.D, cfg.g, cfg.omega13)
    tol = cfg.tolerances
    verdicts: List[Verdict] = []
    refl = float(np.abs(img0.values - obj.values[::-1, ::-1]).max())
    verdicts.append(("image inverted", refl <= 1e-9 * max(1.0, float(np.abs(obj.values).max())), f"max deviation {refl:.2e}"))
    piped_fields = []
    for k, t in enumerate(cfg.times):
        piped = pipeline_image(obj, cfg.f, cfg.wavelength, params, t)
        closed = decay_image(img0, bmap, t)
        piped_fields.append(piped)
        io.write_field_csv(out / f"image_t{k:03d}.csv", piped)
        io.image_pgm(out / f"image_t{k:03d}.pgm", piped)
        err = rel_l2(piped.values, closed.values)
        verdicts.append((f"commutation t = {t * 1e6:g} us", err <= tol["commutation"], f"rel L2 {err:.2e}"))
        dr = dark_region_check(img0, piped, tol["dark_leak"])
        verdicts.append((f"dark region t = {t * 1e6:g} us", dr.passed, f"leak {dr.worst_leak:.2e}"))
        dc = dark_region_check(img0, closed, tol["dark_leak"])
        # multiplicative decay never raises any sample, dark or bright
        mono = bool(np.all(np.abs(closed.values) <= np.abs(img0.values)))
        verdicts.append((f"dark region closed form t = {t * 1e6:g} us", dc.passed and mono, f"leak {dc.worst_leak:.2e}"))
    if cfg.probes:
        series = probe_intensity(piped_fields, cfg.probes, cfg.times)
        labels = list(series.labels)
        io.write_table(
            out / "probes.csv",
            ["t_s"] + [f"I_{lab}" for lab in labels],
            [[t] + list(series.intensity[:, k]) for k, t in enumerate(cfg.times)],
        )
        law = probe_intensity(ImageDecay(img0, bmap), cfg.probes, cfg.times)
        rates = law.decay_rates()
        rows = []
        for lab, p in zip(labels, series.points):
            beta = bmap.rate_at(p)
            rows.append((lab, p[0], p[1], beta, rates[lab]))
            if len(cfg.times) >= 2 and not math.isnan(rates[lab]):
                ok = abs(rates[lab] + 2 * beta) <= 1e-6 * max(2 * beta, 1e-300) or (beta == 0 and abs(rates[lab]) < 1e-12)
                verdicts.append((f"probe {lab} decay slope", ok, f"slope {rates[lab]:.6e} /s, -2 beta {-2 * beta:.6e} /s"))
        io.write_table(out / "probe_rates.csv", ["label", "x_m", "y_m", "beta_per_s", "fitted_slope_per_s"], rows)
    return verdicts


def _run_fidelity(cfg: ExperimentConfig, out: Path) -> List[Verdict]:
    _, img0, bmap = _image_setup(cfg)
    curve = fidelity(img0, bmap, cfg.times, quadrature=cfg.fidelity_quadrature)
    header, cols = ["t_s", "FI"], [curve.times, curve.values]
    if cfg.fidelity_renormalize:
        shape = fidelity(img0, bmap, cfg.times, quadrature=cfg.fidelity_quadrature, renormalize=True)
        header.append("FI_shape")
        cols.append(shape.values)
    io.write_table(out / "fidelity.csv", header, zip(*cols))
    v = curve.values
    verdicts: List[Verdict] = []
    if len(cfg.times) and cfg.times[0] == 0:
        verdicts.append(("FI(0) = 1", abs(v[0] - 1) <= 1e-12, f"{v[0]:.15f}"))
    verdicts.append(("FI non-increasing", bool(np.all(np.diff(v) <= 0)), ""))
    verdicts.append(("FI within [0, 1]", bool(np.all((v >= 0) & (v <= 1 + 1e-12))), ""))
    return verdicts


def _run_validate(cfg: ExperimentConfig, out: Path) -> List[Verdict]:
    f = cfg.f or PAPER["f"]
    lam = cfg.wavelength or PAPER["wavelength"]
    a = cfg.a or PAPER["a"]
    D = cfg.D if cfg.D is not None else PAPER["D"]
    checks = run_validation(f, lam, a, D, cfg.tolerances)
    io.write_table(out / "validate.csv", ["check", "value", "tolerance", "passed"], [(c.name, c.value, c.tolerance, c.passed) for c in checks])
    return [(c.name, c.passed, f"{c.value:.3e} <= {c.tolerance:.1e}") for c in checks]


def run_scenario(cfg: ExperimentConfig, out: Path) -> int:
    """Run ``cfg.scenario`` writing artifacts and summary.txt under ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    runners = {
        "slit-diffuse": lambda: _run_1d(cfg, out, "sinc"),
        "artificial-diffuse": lambda: _run_1d(cfg, out, "artificial"),
        "image-evolve": lambda: _run_image(cfg, out),
        "fidelity": lambda: _run_fidelity(cfg, out),
        "validate": lambda: _run_validate(cfg, out),
    }
    verdicts = runners[cfg.scenario]()
    lines = [f"scenario: {cfg.scenario}"]
    for name, ok, detail in verdicts:
        lines.append(f"{name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else ""))
    all_ok = all(ok for _, ok, _ in verdicts)
    lines.append(f"overall: {'PASS' if all_ok else 'FAIL'}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for line in lines:
        log.info(line)
    return EXIT_OK if all_ok else EXIT_FAIL


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="vaporimage", description=__doc__.splitlines()[0])
    ap.add_argument("scenario", choices=SCENARIOS)
    ap.add_argument("--config", type=Path, help="key = value configuration file")
    ap.add_argument("--out", type=Path, required=True, help="output directory")
    ap.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("-q", "--quiet", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")

    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    try:
        cfg = parse_config(text, args.scenario, args.override)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        return run_scenario(cfg, args.out)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        # geometry that does not fit the grid and similar bad inputs
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
