import json
import math

import numpy as np
import pytest

from echoform.scatterer import ScattererSpec, make_scatterer
from echoform.synthesis import (
    DatasetError,
    DatasetIntegrityError,
    DatasetParseError,
    FrequencyGrid,
    add_noise,
    build_direction_set,
    load_dataset,
    parse_band,
    parse_direction_set,
    q_matrix,
    r_matrix,
    save_dataset,
    synthesize,
)


@pytest.fixture(scope="module")
def small():
    spec = make_scatterer("disk:a=1.5", "impedance", 2.0)
    return synthesize(spec, build_direction_set(64, "A2"), FrequencyGrid(20, 21, 0.5), engine="oracle")


def test_a1_is_backscattering():
    s = build_direction_set(16, "A1")
    np.testing.assert_allclose(s.observations()[:, 0], -s.incidences()[:, 0])
    assert s.descriptor() == "A1:l=16:angle=3.141592653589793"


@pytest.mark.parametrize("alpha", [8, 10])
def test_a2_rotations(alpha):
    s = build_direction_set(64, "A2", alphas=(8, 10))
    j = s.rotation_index(alpha)
    inc, obs = s.incidences(), s.observations()
    # incidences are a permutation of the base set
    for i in range(64):
        s.base_index(inc[i, j])
    # xhat . xhat_j = cos(alpha pi / 32) with xhat = -theta
    c = np.einsum("ij,ij->i", obs[:, 0], obs[:, j])
    np.testing.assert_allclose(c, math.cos(alpha * math.pi / 32), atol=1e-14)
    np.testing.assert_allclose(q_matrix(alpha) @ r_matrix(alpha) @ [1.0, 0.0], obs[0, j], atol=1e-14)


def test_a2_closure_check():
    with pytest.raises(DatasetError):
        build_direction_set(48, "A2")
    build_direction_set(128, "A2")


def test_direction_descriptor_round_trip():
    for s in (build_direction_set(64, "A2", alphas=(8, 10)), build_direction_set(12, "A1", angle=2.5)):
        again = parse_direction_set(s.descriptor())
        np.testing.assert_array_equal(again.observations(), s.observations())


@pytest.mark.parametrize("text", ["20:10", "1:2:0.3", "a:b", "1", "1:2:0", "0:2"])
def test_bad_bands(text):
    with pytest.raises(DatasetError):
        parse_band(text)


def test_band_layout():
    g = parse_band("20:50:0.1")
    assert g.M == 300 and len(g.ks) == 301
    assert g.ks[-1] == pytest.approx(50.0)


def test_synthesis_layout(small):
    assert small.values.shape == (64, 3, 3)
    theta = small.directions.base[5]
    np.testing.assert_array_equal(small.backscatter(-theta), small.values[5, 0])
    assert small.count == 64 * 3 * 3
    records = list(small.records())
    assert len(records) == small.count


def test_oracle_engine_needs_disk():
    with pytest.raises(DatasetError):
        synthesize(make_scatterer("egg"), build_direction_set(8, "A1"), FrequencyGrid(1, 2, 0.5), engine="oracle")


def test_bie_and_oracle_engines_agree():
    spec = make_scatterer("disk:a=1.5", "neumann")
    pairs, grid = build_direction_set(8, "A1"), FrequencyGrid(4, 5, 0.5)
    a = synthesize(spec, pairs, grid, engine="bie")
    b = synthesize(spec, pairs, grid, engine="oracle")
    assert np.max(np.abs(a.values - b.values)) < 1e-10


def test_noise_layout_and_scaling(small):
    noisy = add_noise(small, 0.1, 7)
    z = np.random.default_rng(7).standard_normal((small.count, 2))
    expected = small.values.reshape(-1) * (1 + 0.1 * (z[:, 0] + 1j * z[:, 1]))
    np.testing.assert_array_equal(noisy.values.reshape(-1), expected)
    assert (noisy.delta, noisy.seed) == (0.1, 7)
    with pytest.raises(DatasetError):
        add_noise(noisy, 0.1, 8)
    with pytest.raises(DatasetError):
        add_noise(small, -0.1, 8)
    np.testing.assert_array_equal(add_noise(small, 0.0, 1).values, small.values)


def test_save_load_round_trip(small, tmp_path):
    path = tmp_path / "d.csv"
    noisy = add_noise(small, 0.3, 1)
    save_dataset(noisy, path)
    back = load_dataset(path)
    np.testing.assert_array_equal(back.values, noisy.values)
    assert back.manifest() == noisy.manifest()
    assert ScattererSpec.from_descriptor(back.scatterer).descriptor() == small.scatterer
    lines = path.read_text().splitlines()
    assert json.loads(lines[0])["count"] == small.count
    assert lines[1] == "theta_x,theta_y,obs_x,obs_y,k,re,im"


def _corrupt(path, lineno, new):
    lines = path.read_text().splitlines()
    lines[lineno - 1] = new
    path.write_text("\n".join(lines) + "\n")


def test_load_errors_point_at_lines(small, tmp_path):
    path = tmp_path / "d.csv"
    save_dataset(small, path)
    _corrupt(path, 7, "1,0,-1,0,20,abc,0")
    with pytest.raises(DatasetParseError) as info:
        load_dataset(path)
    assert info.value.line == 7

    save_dataset(small, path)
    row = path.read_text().splitlines()[9].split(",")
    row[4] = "99"
    _corrupt(path, 10, ",".join(row))
    with pytest.raises(DatasetIntegrityError, match="line 10"):
        load_dataset(path)

    save_dataset(small, path)
    path.write_text("\n".join(path.read_text().splitlines()[:-1]) + "\n")
    with pytest.raises(DatasetIntegrityError):
        load_dataset(path)

    path.write_text("not json\n")
    with pytest.raises(DatasetParseError) as info:
        load_dataset(path)
    assert info.value.line == 1
