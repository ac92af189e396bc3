import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from echoform.benchmark import DISK_BENCHMARK, DISK_RADIUS
from echoform.oracle import DiskSpec, TruncationError, disk_far_field, disk_far_field_matrix, mode_count


@pytest.mark.parametrize("case", DISK_BENCHMARK, ids=[c[0] for c in DISK_BENCHMARK])
def test_published_values(case):
    _, bc, lam, k, xhat, theta, ref = case
    got = disk_far_field(DiskSpec(DISK_RADIUS, bc=bc, lam=lam), xhat, theta, k)
    assert abs(got.real - ref.real) <= 5e-5
    assert abs(got.imag - ref.imag) <= 5e-5


def test_impedance_limits():
    # lambda -> inf approaches Dirichlet, lambda -> 0 approaches Neumann
    args = ([-1.0, 0.0], [1.0, 0.0], 20.0)
    d = disk_far_field(DiskSpec(1.5), *args)
    n = disk_far_field(DiskSpec(1.5, bc="neumann"), *args)
    assert abs(disk_far_field(DiskSpec(1.5, bc="impedance", lam=1e7), *args) - d) < 1e-5
    assert abs(disk_far_field(DiskSpec(1.5, bc="impedance", lam=1e-7), *args) - n) < 1e-5


def test_truncation_order_is_converged():
    spec = DiskSpec(1.5, bc="impedance", lam=0.5)
    base = disk_far_field(spec, [0.3, 0.9], [1.0, 0.0], 37.0)
    more = disk_far_field(spec, [0.3, 0.9], [1.0, 0.0], 37.0, extra_modes=20)
    assert abs(base - more) < 1e-13
    assert mode_count(75.0) == math.ceil(75 + 8 * 75 ** (1 / 3) + 10)


def test_truncation_check_fires():
    with pytest.raises(TruncationError):
        disk_far_field(DiskSpec(1.5), [1.0, 0.0], [1.0, 0.0], 20.0, extra_modes=-40)


def test_translation_phase():
    # a shifted disk only picks up e^{ik c.(theta - xhat)}
    c = np.array([0.4, -0.7])
    xhat, theta, k = np.array([0.6, 0.8]), np.array([1.0, 0.0]), 12.0
    shifted = disk_far_field(DiskSpec(1.0, center=tuple(c)), xhat, theta, k)
    centred = disk_far_field(DiskSpec(1.0), xhat, theta, k)
    assert shifted == pytest.approx(centred * np.exp(1j * k * c @ (theta - xhat)), abs=1e-14)


def test_matrix_matches_pointwise():
    spec = DiskSpec(1.2, center=(0.1, 0.3), bc="neumann")
    ang = np.array([0.0, 0.9, 2.0, 4.1])
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    m = disk_far_field_matrix(spec, dirs[:3], dirs, 9.0)
    assert m.shape == (3, 4)
    for i in range(3):
        for j in range(4):
            assert m[i, j] == pytest.approx(disk_far_field(spec, dirs[i], dirs[j], 9.0), abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0.5, 40), st.sampled_from(["dirichlet", "neumann", "impedance"]))
def test_reciprocity(a, b, k, bc):
    spec = DiskSpec(1.5, center=(0.3, -0.2), bc=bc, lam=2.0 if bc == "impedance" else None)
    xhat, theta = np.array([math.cos(a), math.sin(a)]), np.array([math.cos(b), math.sin(b)])
    assert abs(disk_far_field(spec, xhat, theta, k) - disk_far_field(spec, -theta, -xhat, k)) < 1e-10


def test_optical_theorem_dirichlet():
    # energy balance: Im(e^{-i pi/4} ... ) form of the optical theorem for this normalization
    spec = DiskSpec(1.0)
    k = 7.0
    ang = 2 * np.pi * np.arange(512) / 512
    obs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    u = disk_far_field_matrix(spec, obs, [[1.0, 0.0]], k)[:, 0]
    total = np.sum(np.abs(u) ** 2) * 2 * np.pi / 512
    forward = u[0]
    assert total == pytest.approx(-math.sqrt(8 * math.pi / k) * (forward * np.exp(0.25j * np.pi)).real, rel=1e-10)


@pytest.mark.parametrize("bad", [dict(radius=0.0), dict(radius=1.0, bc="robin"), dict(radius=1.0, bc="impedance", lam=-1.0)])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        DiskSpec(**bad)
