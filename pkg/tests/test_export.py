import json
import math

import numpy as np
import pytest

from echoform.export import read_grid_csv, read_pgm, write_grid_csv, write_json, write_pgm
from echoform.inversion.indicators import GridSpec, IndicatorGrid


@pytest.fixture
def grid():
    spec = GridSpec(-1.0, 1.0, 0.0, 0.5, 0.25)
    X, Y = np.meshgrid(spec.xs, spec.ys)
    return IndicatorGrid(spec, X + 10 * Y, "T")


def test_csv_round_trip(grid, tmp_path):
    write_grid_csv(grid, tmp_path / "g.csv")
    back = read_grid_csv(tmp_path / "g.csv")
    assert back.spec == grid.spec
    assert back.name == "T"
    np.testing.assert_allclose(back.values, grid.values, rtol=1e-9)


def test_csv_without_header(tmp_path):
    (tmp_path / "g.csv").write_text("1,2\n3,4\n")
    with pytest.raises(ValueError):
        read_grid_csv(tmp_path / "g.csv")


def test_pgm_orientation_and_sidecar(grid, tmp_path):
    meta = write_pgm(grid, tmp_path / "g.pgm")
    assert (tmp_path / "g.pgm").read_bytes().startswith(b"P5\n9 3\n65535\n")
    pix = read_pgm(tmp_path / "g.pgm")
    assert pix.shape == (3, 9)
    # top row is y_max, where the values are largest; the right column is x_max
    assert pix[0, -1] == 65535 and pix[-1, 0] == 0
    side = json.loads((tmp_path / "g.pgm.json").read_text())
    assert side == json.loads(json.dumps(meta))
    restored = side["min"] + pix[::-1] / side["maxval"] * (side["max"] - side["min"])
    np.testing.assert_allclose(restored, grid.values, atol=(side["max"] - side["min"]) / 65535)


def test_pgm_constant_grid(tmp_path):
    spec = GridSpec(0, 1, 0, 1, 0.5)
    write_pgm(IndicatorGrid(spec, np.full(spec.shape, 3.0)), tmp_path / "c.pgm")
    assert not read_pgm(tmp_path / "c.pgm").any()


def test_write_json_handles_numpy_and_infinities(tmp_path):
    write_json({"a": np.float64(1.5), "b": np.arange(3), "c": math.inf, "d": -math.inf, "e": math.nan, 4: np.int32(2)}, tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text()) == {"a": 1.5, "b": [0, 1, 2], "c": "inf", "d": "-inf", "e": None, "4": 2}
