import math

import numpy as np
import pytest

import echoform.solver as solver
from echoform.benchmark import TOLERANCE, benchmark_rows
from echoform.oracle import DiskSpec, disk_far_field_matrix
from echoform.scatterer import make_scatterer
from echoform.solver import (
    QuadratureTooCoarse,
    SolveRequest,
    far_field_sweep,
    po_far_field,
    required_nodes,
    solve_far_field,
)

DIRS = np.array([[math.cos(a), math.sin(a)] for a in (0.0, 2.0, 4.0)])


@pytest.mark.parametrize("bc,lam", [("dirichlet", None), ("neumann", None), ("impedance", 0.06), ("impedance", 12.06)])
@pytest.mark.parametrize("k", [0.5, 8.0, 31.0])
def test_matches_oracle_off_centre(bc, lam, k):
    spec = make_scatterer("disk:a=0.8,cx=0.4,cy=-0.3", bc, lam)
    got = solve_far_field(SolveRequest(spec, k, DIRS, -DIRS))
    ref = disk_far_field_matrix(DiskSpec(0.8, (0.4, -0.3), bc, lam), -DIRS, DIRS, k)
    assert np.max(np.abs(got - ref)) < 1e-9 * max(1.0, np.max(np.abs(ref)))


def test_variable_impedance_limits():
    xhat, theta = np.array([1.0, 0.0]), np.array([-1.0, 0.0])

    def u(bc, lam=None):
        return solve_far_field(SolveRequest(make_scatterer("kite", bc, lam), 10.0, theta, xhat))[0, 0]

    assert abs(u("impedance", "200+cos(t)") - u("dirichlet")) < 0.02
    assert abs(u("impedance", "0.001+0.0005*cos(t)") - u("neumann")) < 0.02


def test_required_nodes_scale_with_wavelength():
    egg = make_scatterer("egg").curve
    assert required_nodes(egg, 1.0) == solver.NODE_FLOOR
    n50 = required_nodes(egg, 50.0)
    assert n50 % 2 == 0
    assert n50 >= solver.POINTS_PER_WAVELENGTH * egg.length() * 50 / (2 * math.pi)


def test_too_coarse_request_rejected():
    spec = make_scatterer("disk:a=1.5")
    with pytest.raises(QuadratureTooCoarse):
        solve_far_field(SolveRequest(spec, 50.0, DIRS, DIRS, size=64))
    with pytest.raises(QuadratureTooCoarse):
        solve_far_field(SolveRequest(spec, 5.0, DIRS, DIRS, size=101))


def test_coarse_resolution_breaks_the_table_check(monkeypatch):
    monkeypatch.setattr(solver, "POINTS_PER_WAVELENGTH", 1)
    monkeypatch.setattr(solver, "NODE_FLOOR", 8)
    worst = max(r["diff"] for r in benchmark_rows() if r["source"] == "solver")
    assert worst > TOLERANCE


def test_sweep_agrees_with_single_solves_and_threads():
    spec = make_scatterer("egg", "impedance", "2+0.5*sin(t)")
    ks = [3.0, 3.5, 9.25]
    serial = far_field_sweep(spec, ks, DIRS, -DIRS)
    threaded = far_field_sweep(spec, ks, DIRS, -DIRS, threads=3)
    assert serial.shape == (3, 3, 3)
    np.testing.assert_array_equal(serial, threaded)
    for i, k in enumerate(ks):
        single = solve_far_field(SolveRequest(spec, k, DIRS, -DIRS))
        assert np.max(np.abs(serial[i] - single)) < 1e-10


def test_convergence_in_node_count():
    spec = make_scatterer("kite", "neumann")
    a = solve_far_field(SolveRequest(spec, 20.0, DIRS, -DIRS))
    b = solve_far_field(SolveRequest(spec, 20.0, DIRS, -DIRS, size=2 * required_nodes(spec.curve, 20.0)))
    assert np.max(np.abs(a - b)) < 1e-8


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_physical_optics_high_frequency(bc):
    spec = make_scatterer("disk:a=1.5", bc)
    exact = disk_far_field_matrix(DiskSpec(1.5, bc=bc), [[-1.0, 0.0]], [[1.0, 0.0]], 50.0)[0, 0]
    po = po_far_field(spec, [-1.0, 0.0], 50.0)
    assert abs(po - exact) / abs(exact) < 0.05


def test_nonpositive_wavenumber():
    with pytest.raises(ValueError):
        solve_far_field(SolveRequest(make_scatterer("egg"), 0.0, DIRS, DIRS))
