import json

import pytest

from echoform import __version__
from echoform.cli import main
from echoform.synthesis import load_dataset

DISK = ["--geometry", "disk:a=1.5", "--engine", "oracle", "--directions", "64", "--band", "20:30:0.1"]


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_synthesize_round_trip(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["synthesize", *DISK, "--bc", "neumann", "--out", str(out), "--seed", "3"]) == 0
    data = load_dataset(out)
    assert data.directions.l == 64 and data.directions.kind == "A2"
    assert data.delta == 0.1 and data.seed == 3
    assert "wrote" in capsys.readouterr().out


def test_synthesize_needs_out(capsys):
    assert main(["synthesize", *DISK]) == 2
    assert "--out" in capsys.readouterr().err


def test_bad_band_creates_nothing(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["synthesize", "--band", "50:20:0.1", "--out", str(out)]) == 2
    assert not out.exists()


def test_pipeline_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    args = ["pipeline", *DISK, "--bc", "impedance", "--lambda", "2", "--grid=-2:2:-2:2:0.05", "--out", str(out), "--json"]
    assert main(args) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["classification"] == "impedance"
    names = sorted(p.name for p in out.iterdir())
    assert names == ["indicator_I.csv", "indicator_I.pgm", "indicator_I.pgm.json", "report.json"]
    assert json.loads((out / "report.json").read_text())["classification"] == "impedance"


def test_pipeline_failure_leaves_no_directory(tmp_path):
    out = tmp_path / "run"
    assert main(["pipeline", *DISK, "--grid", "0:1:0:1:0.3", "--out", str(out)]) == 2
    assert not out.exists()


def test_classify_and_impedance(tmp_path, capsys):
    assert main(["classify", *DISK, "--bc", "dirichlet"]) == 0
    assert capsys.readouterr().out.strip() == "dirichlet-or-neumann"
    report = tmp_path / "imp.json"
    assert main(["impedance", *DISK, "--bc", "impedance", "--lambda", "2", "--set", "A1", "--noise", "0",
                 "--with-boundary", "--out", str(report)]) == 0
    table = json.loads(report.read_text())["lambda"]
    assert len(table) == 64
    assert all(abs(v - 2) < 0.01 for v in table.values())


def test_bad_expression_is_config_error(capsys):
    assert main(["classify", *DISK, "--bc", "impedance", "--lambda", "2+*t"]) == 2
    assert "error" in capsys.readouterr().err


def test_calibrate_writes_record(tmp_path, capsys):
    out = tmp_path / "cal.json"
    assert main(["calibrate", "--out", str(out)]) == 0
    record = json.loads(out.read_text())
    assert record["s"] == -1 and record["mobius"] == "(1-H)/(1+H)"


@pytest.mark.slow
def test_oracle_command(capsys):
    assert main(["oracle"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("case,source")
    assert len(lines) == 33
