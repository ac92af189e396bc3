import math

import numpy as np
import pytest

from echoform.inversion.indicators import (
    GridSpec,
    IndicatorError,
    IndicatorGrid,
    bojarski_V,
    dn_sign_test,
    indicator_I,
    indicator_T,
    parse_grid,
    ridge_extract,
)
from echoform.oracle import DiskSpec, disk_far_field
from echoform.scatterer import make_scatterer
from echoform.synthesis import FrequencyGrid, build_direction_set, synthesize

COARSE = GridSpec(-3, 3, -3, 3, 0.05)


@pytest.fixture(scope="module")
def disk_data():
    return synthesize(make_scatterer("disk:a=1.5"), build_direction_set(32, "A1"), FrequencyGrid(20, 50, 0.1), engine="oracle")


def test_grid_spec():
    g = parse_grid("-1:1:0:0.5:0.25")
    assert g.shape == (3, 9)
    np.testing.assert_allclose(g.xs, np.linspace(-1, 1, 9))
    for bad in ("1:0:0:1:0.1", "0:1:0:1:0.3", "0:1:0:1", "a:b:c:d:e", "0:1:0:1:-0.1"):
        with pytest.raises(IndicatorError):
            parse_grid(bad)


def test_sample_is_bilinear():
    spec = GridSpec(0, 1, 0, 1, 0.5)
    X, Y = np.meshgrid(spec.xs, spec.ys)
    grid = IndicatorGrid(spec, 2 * X + 3 * Y)
    assert grid.sample([[0.3, 0.7]])[0] == pytest.approx(2 * 0.3 + 3 * 0.7)
    assert np.isnan(grid.sample([[2.0, 0.0]])[0])


def test_bojarski_matches_area_transform():
    k, a = 50.0, 1.5
    xhat = np.array([1.0, 0.0])
    spec = DiskSpec(a)
    v = bojarski_V(disk_far_field(spec, xhat, -xhat, k), disk_far_field(spec, -xhat, xhat, k), k)
    # Fourier transform of the disk indicator at |xi| = 2k: 2 pi a J1(2ka) / (2k)
    from scipy.special import j1

    exact = 2 * math.pi * a * j1(2 * k * a) / (2 * k)
    assert abs(abs(v) - abs(exact)) <= 0.15 * abs(exact)
    w = bojarski_V(disk_far_field(spec, -xhat, xhat, k), disk_far_field(spec, xhat, -xhat, k), k)
    assert abs(w - np.conj(v)) <= 0.15 * abs(v)


def test_zero_data(disk_data, cal):
    zero = disk_data.select_rotations([0])
    zero.values[:] = 0
    grid = indicator_I(zero, np.ones(32), COARSE, cal)
    assert not grid.values.any()
    with pytest.warns(RuntimeWarning), pytest.raises(IndicatorError):
        indicator_T(zero, COARSE, cal)


@pytest.mark.parametrize("bc,expected", [("dirichlet", "dirichlet"), ("neumann", "neumann")])
def test_indicator_I_low_band_signs(cal, bc, expected):
    # the sign layer is only resolved when the band reaches low frequencies
    data = synthesize(make_scatterer("disk:a=1.5", bc), build_direction_set(32, "A1"), FrequencyGrid(1, 30, 0.1), engine="oracle")
    grid = indicator_I(data, np.ones(32), GridSpec(-3, 3, -3, 3, 0.02), cal)
    assert grid.diagnostics["imag_ratio"] < 0.05
    t = np.linspace(-math.pi, math.pi, 128, endpoint=False)
    pts = 1.5 * np.stack([np.cos(t), np.sin(t)], axis=1)
    assert dn_sign_test(grid, pts, pts / 1.5).verdict == expected


def test_gamma_zero_skips_direction(disk_data, cal):
    gamma = np.ones(32)
    gamma[3] = 0.0
    with pytest.warns(RuntimeWarning, match="gamma"):
        grid = indicator_I(disk_data, gamma, COARSE, cal)
    # direction 3 and the direction whose opposite is 3 are both dropped
    assert grid.diagnostics["directions_used"] == 30


def test_T_single_direction_tangent_line(cal):
    data = synthesize(make_scatterer("disk:a=1.5"), build_direction_set(4, "A1"), FrequencyGrid(20, 50, 0.1), engine="oracle")
    one = data.select_rotations([0])
    one.values[1:] = 0
    with pytest.warns(RuntimeWarning):
        grid = indicator_T(one, GridSpec(-3, 3, -3, 3, 0.01), cal)
    iy, ix = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    # xhat = -theta_0 = (-1, 0): its supporting line is x = -1.5
    assert abs(abs(grid.spec.xs[ix]) - 1.5) <= 0.01


def test_T_four_directions_square(cal):
    data = synthesize(make_scatterer("disk:a=1.5"), build_direction_set(4, "A1"), FrequencyGrid(20, 50, 0.1), engine="oracle")
    grid = indicator_T(data, GridSpec(-3, 3, -3, 3, 0.02), cal)
    # corners of the square silhouette collect two lines, the centre none
    corner = grid.sample([[1.5, 1.5]])[0]
    assert corner > 0.9 * grid.values.max()
    assert grid.sample([[0.0, 0.0]])[0] < 0.3 * corner


def test_ridge_of_ring():
    spec = GridSpec(-3, 3, -3, 3, 0.01)
    X, Y = np.meshgrid(spec.xs, spec.ys)
    ring = (np.abs(np.hypot(X, Y) - 1.5) < 0.005).astype(float)
    cloud = ridge_extract(IndicatorGrid(spec, ring))
    r = np.hypot(cloud.points[:, 0], cloud.points[:, 1])
    assert np.max(np.abs(r - 1.5)) <= 0.01
    # normals point outward
    assert np.all(np.sum(cloud.normals * cloud.points, axis=1) > 0)


def test_ridge_errors():
    with pytest.raises(IndicatorError):
        ridge_extract(IndicatorGrid(COARSE, np.zeros(COARSE.shape)))
    with pytest.raises(IndicatorError):
        ridge_extract(IndicatorGrid(COARSE, np.ones(COARSE.shape)), quantile=1.0)


def test_sign_test_rules():
    spec = GridSpec(-2, 2, -2, 2, 0.05)
    X, Y = np.meshgrid(spec.xs, spec.ys)
    bump = IndicatorGrid(spec, np.where(np.hypot(X, Y) < 1, 1.0, -1.0))
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    assert dn_sign_test(bump, pts, pts).verdict == "dirichlet"
    flipped = IndicatorGrid(spec, -bump.values)
    assert dn_sign_test(flipped, pts, pts).verdict == "neumann"
    assert dn_sign_test(IndicatorGrid(spec, np.ones(spec.shape)), pts, pts).verdict == "inconclusive"
    with pytest.raises(IndicatorError):
        dn_sign_test(bump, np.empty((0, 2)), np.empty((0, 2)))
