"""Shared fixtures: calibration, cached solver datasets, acceptance report."""

from __future__ import annotations

import hashlib
import re
from collections import defaultdict

import pytest

from echoform import __version__
from echoform.inversion.calibration import get_calibration
from echoform.scatterer import make_scatterer
from echoform.synthesis import FrequencyGrid, build_direction_set, load_dataset, save_dataset, synthesize

LAMBDA2 = "2+0.5*sin(t)+0.2*sin(5*t)"

_criteria: dict[int, list[tuple[str, str, str]]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture(scope="session")
def cal():
    return get_calibration()


class DatasetCache:
    """Noise-free solver datasets, kept across sessions in the pytest cache.

    The key hashes the full configuration and the package version, so a new
    release regenerates everything.
    """

    def __init__(self, root):
        self.root = root
        self.memo = {}

    def get(self, geometry, bc, lam=None, config="A2", band=(20, 50), engine="bie"):
        key = (geometry, bc, lam, config, band, engine)
        if key in self.memo:
            return self.memo[key]
        digest = hashlib.sha1(repr((key, __version__)).encode()).hexdigest()[:12]
        stem = re.sub(r"[^A-Za-z0-9]+", "_", f"{geometry}_{bc}_{config}_{band[0]}_{band[1]}")
        path = self.root / f"{stem}_{digest}.csv"
        if path.exists():
            data = load_dataset(path)
        else:
            spec = make_scatterer(geometry, bc, lam)
            data = synthesize(spec, build_direction_set(64, config), FrequencyGrid(*band, 0.1), engine=engine)
            save_dataset(data, path)
        self.memo[key] = data
        return data


@pytest.fixture(scope="session")
def datasets(request):
    return DatasetCache(request.config.cache.mkdir("echoform-datasets"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _criteria[mark.args[0]].append((item.name, rep.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        runs = _criteria[n]
        ok = all(outcome == "passed" for _, outcome, _ in runs)
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}")
        for name, outcome, detail in runs:
            tr.write_line(f"    {outcome:7s} {name}" + (f"  [{detail}]" if detail else ""))
