import math

import numpy as np
import pytest

from vaporimage import (
    HGeometry,
    ObjectSpec,
    alpha_of,
    artificial_pattern,
    babinet_pair,
    make_grid,
    make_object,
    slit_pattern,
)
from vaporimage.patterns import mask_from_pgm, read_pgm

from conftest import ALPHA, PROBES


def test_alpha_paper_value():
    # pi * 100e-6 / (0.25 * 795e-9)
    assert alpha_of(100e-6, 0.25, 795e-9) == pytest.approx(1580.6755, rel=1e-7)
    assert round(alpha_of(100e-6, 0.25, 795e-9), 2) == 1580.68


def test_alpha_scale_invariance():
    assert alpha_of(50e-6, 0.1, 633e-9) == pytest.approx(alpha_of(100e-6, 0.2, 633e-9), rel=1e-15)


@pytest.mark.parametrize("args", [(0, 0.25, 795e-9), (1e-4, -1, 795e-9), (1e-4, 0.25, 0)])
def test_alpha_rejects(args):
    with pytest.raises(ValueError):
        alpha_of(*args)


def test_slit_pattern_special_values():
    # grids chosen so the points of interest are sample centers
    g = make_grid(1, 8, 4 * math.pi / 3)  # dx = pi/3 -> samples at +-pi/6, +-pi/2, +-5pi/6, +-7pi/6
    v = slit_pattern(1.0, 2.0, g).values.real
    assert v[np.argmin(abs(g.axis() - math.pi / 2))] == pytest.approx(2 * 2 / math.pi, rel=1e-14)
    g = make_grid(1, 8, 8 * math.pi / 3)  # dx = 2pi/3 -> samples at +-pi/3, +-pi, ...
    v = slit_pattern(1.0, 1.0, g).values.real
    assert abs(v[np.argmin(abs(g.axis() - math.pi))]) < 1e-15
    g = make_grid(1, 8, 16 * math.pi / 3)  # dx = 4pi/3: samples at 2pi/3, 2pi, 10pi/3, 14pi/3
    v = slit_pattern(1.0, 1.0, g).values.real
    assert abs(v[np.argmin(abs(g.axis() - 2 * math.pi))]) < 1e-15
    g = make_grid(1, 8, 4 * math.pi)  # dx = pi: samples at pi/2, 3pi/2, ...
    v = slit_pattern(1.0, 1.5, g).values.real
    assert v[np.argmin(abs(g.axis() - 1.5 * math.pi))] == pytest.approx(-2 * 1.5 / (3 * math.pi), rel=1e-14)


def test_slit_pattern_origin_limit():
    g = make_grid(1, 8, 1e-9)
    v = slit_pattern(1.0, 3.0, g).values
    np.testing.assert_allclose(v.real, 3.0, rtol=1e-15)
    # series branch continuous with the closed form at the cutoff
    g = make_grid(1, 8, 4e-8)
    np.testing.assert_allclose(slit_pattern(1.0, 1.0, g).values.real, np.sin(g.axis()) / g.axis(), rtol=1e-15)


def test_slit_pattern_even_and_phase_flips(grid1d):
    v = slit_pattern(ALPHA, 1.0, grid1d).values.real
    np.testing.assert_array_equal(v, v[::-1])
    x = grid1d.axis()
    for k in range(0, 12):
        i = np.argmin(abs(x - (k + 0.5) * math.pi / ALPHA))
        assert np.sign(v[i]) == (-1) ** k


def test_artificial_pattern_values():
    g = make_grid(1, 8, 8 * math.pi / 3)  # samples at +-pi/3, +-pi, +-5pi/3, +-7pi/3
    w = math.sqrt(20)
    v = artificial_pattern(1.0, w, 1.0, g).values.real
    assert abs(v[np.argmin(abs(g.axis() - math.pi))]) < 1e-16
    g = make_grid(1, 8, 16 * math.pi / 3)  # sample at 2pi
    v = artificial_pattern(1.0, w, 1.0, g).values.real
    assert v[np.argmin(abs(g.axis() - 2 * math.pi))] == pytest.approx(math.exp(-4 * math.pi**2 / 20), rel=1e-14)
    assert math.exp(-4 * math.pi**2 / 20) == pytest.approx(0.1389, abs=5e-5)
    g = make_grid(1, 8, 1e-9)
    np.testing.assert_allclose(artificial_pattern(1.0, w, 2.0, g).values.real, 2.0, rtol=1e-15)


def test_artificial_pattern_nonnegative(grid1d):
    v = artificial_pattern(ALPHA, math.sqrt(20) / ALPHA, 1.0, grid1d).values
    assert np.all(v.real >= 0) and np.all(v.imag == 0)


def test_plane_wave_and_babinet(grid2d):
    plane = make_object(ObjectSpec("plane_wave"), grid2d)
    assert np.all(plane.values == 1)
    slit = ObjectSpec("single_slit", width=100e-6)
    wire = ObjectSpec("dark_wire", width=100e-6)
    total = make_object(slit, grid2d) + make_object(wire, grid2d)
    np.testing.assert_array_equal(total.values, plane.values)


@pytest.mark.parametrize(
    "spec",
    [
        ObjectSpec("single_slit", width=60e-6),
        ObjectSpec("dark_wire", width=60e-6),
        ObjectSpec("h_with_cross"),
        ObjectSpec("raster_mask", mask=np.eye(6), pitch=10e-6),
    ],
)
def test_babinet_pair_sums_to_plane_wave(spec, grid2d):
    comp, plane = babinet_pair(spec)
    assert plane.kind == "plane_wave"
    s = make_object(spec, grid2d) + make_object(comp, grid2d)
    np.testing.assert_array_equal(s.values, make_object(plane, grid2d).values)


def test_babinet_slit_gives_wire():
    comp, _ = babinet_pair(ObjectSpec("single_slit", width=1e-4))
    assert comp.kind == "dark_wire" and comp.width == 1e-4


@pytest.mark.parametrize("spec", [ObjectSpec("hg_mode", indices=(1, 1), waist=50e-6), ObjectSpec("plane_wave")])
def test_babinet_rejects_non_binary(spec):
    with pytest.raises(ValueError):
        babinet_pair(spec)


def test_hg11_parity(grid2d):
    u = make_object(ObjectSpec("hg_mode", indices=(1, 1), waist=50e-6), grid2d).values
    np.testing.assert_allclose(u, -u[::-1, :], atol=1e-15)
    np.testing.assert_allclose(u, -u[:, ::-1], atol=1e-15)
    assert np.abs(u).max() == pytest.approx(1.0)
    # zero lines: the samples next to each axis are small relative to the lobes
    assert np.abs(u[255:257, :]).max() < 0.05 and np.abs(u[:, 255:257]).max() < 0.05


def test_lg_vortex_phase_winding(grid2d):
    u = make_object(ObjectSpec("lg_vortex", indices=(0, 1), waist=50e-6), grid2d).values
    x = grid2d.axis()
    r, c = np.argmin(abs(x - 35e-6)), np.argmin(abs(x))
    # for l = 1 the phase on the +y axis leads the +x axis by a quarter turn
    ph = np.angle(u[c, r]) - np.angle(u[r, c])
    assert abs(np.exp(1j * ph) - 1j) < 0.05
    assert np.abs(u).max() == pytest.approx(1.0)


def test_h_geometry_probes(grid2d, h_object):
    v = h_object.values.real
    assert set(np.unique(v)) == {0.0, 1.0}
    for name, p in PROBES.items():
        assert v[grid2d.nearest_index(p)] == 1.0, name
    for dark in [(0.0, 0.0), (0.0, 20e-6), (20e-6, 0.0), (0.0, 100e-6), (0.0, -100e-6)]:
        assert v[grid2d.nearest_index(dark)] == 0.0
    # point symmetric
    np.testing.assert_array_equal(v, v[::-1, ::-1])
    bright, dark = HGeometry().rectangles()
    area = sum((x1 - x0) * (y1 - y0) for x0, x1, y0, y1 in bright) - (2 * 10e-6 * 60e-6 - 10e-6 * 10e-6)
    assert v.sum() * grid2d.cell_area == pytest.approx(area, rel=1e-12)


def test_object_geometry_must_fit():
    small = make_grid(2, 64, 50e-6)
    with pytest.raises(ValueError):
        make_object(ObjectSpec("h_with_cross"), small)
    with pytest.raises(ValueError):
        make_object(ObjectSpec("single_slit", width=200e-6), small)
    with pytest.raises(ValueError):
        make_object(ObjectSpec("raster_mask", mask=np.ones((20, 20)), pitch=10e-6), small)


def test_spec_validation():
    with pytest.raises(ValueError):
        ObjectSpec("single_slit")
    with pytest.raises(ValueError):
        ObjectSpec("hg_mode", indices=(-1, 0), waist=1e-5)
    with pytest.raises(ValueError):
        ObjectSpec("raster_mask", mask=np.zeros((0, 0)), pitch=1e-6)
    with pytest.raises(ValueError):
        ObjectSpec("triangle")
    with pytest.raises(ValueError):
        HGeometry(cross_arm=100e-6)


def _write_pgm(path, img, maxval, binary):
    h, w = img.shape
    if binary:
        head = f"P5\n# test\n{w} {h}\n{maxval}\n".encode()
        dt = ">u2" if maxval > 255 else "u1"
        path.write_bytes(head + img.astype(dt).tobytes())
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in img)
        path.write_text(f"P2\n# test\n{w} {h}\n{maxval}\n{body}\n")


@pytest.mark.parametrize("binary, maxval", [(False, 255), (True, 255), (True, 1000), (False, 65535)])
def test_pgm_raster_roundtrip(tmp_path, binary, maxval):
    img = np.zeros((4, 6), dtype=int)
    img[0, :] = maxval  # top row bright
    img[:, 0] = maxval // 2 + 1  # left column just above threshold
    p = tmp_path / "m.pgm"
    _write_pgm(p, img, maxval, binary)
    np.testing.assert_allclose(read_pgm(p), img / maxval)
    spec = mask_from_pgm(p, pitch=10e-6)
    grid = make_grid(2, 16, 40e-6)  # dx = 5 um, two samples per pixel
    u = make_object(spec, grid).values.real
    x = grid.axis()
    top = np.argmin(abs(x - 17.5e-6))
    assert u[np.argmin(abs(x - 20e-6 + 2.5e-6)), top] == 1.0  # top row, right side
    assert u[np.argmin(abs(x + 27.5e-6)), np.argmin(abs(x + 17.5e-6))] == 1.0  # left column, bottom
    assert u[np.argmin(abs(x - 2.5e-6)), np.argmin(abs(x + 2.5e-6))] == 0.0
    assert u[0, 0] == 0.0  # outside the raster


def test_pgm_rejects_garbage(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_text("P3\n1 1\n255\n0 0 0\n")
    with pytest.raises(ValueError):
        read_pgm(p)
