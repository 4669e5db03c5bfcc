import numpy as np
import pytest

from igo.numerics import ATRACURIUM
from igo.poincare import CycleSpec, fixed_point_analytic

_criteria: dict[int, list[tuple[str, bool]]] = {}


@pytest.fixture(scope="session")
def plant():
    return ATRACURIUM


@pytest.fixture(scope="session")
def fp(plant):
    return fixed_point_analytic(plant, CycleSpec(300.0, 20.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None and (rep.when == "call" or rep.failed):
        _criteria.setdefault(mark.args[0], []).append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        checks = _criteria[n]
        ok = all(p for _, p in checks)
        failed = [name for name, p in checks if not p]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({sum(p for _, p in checks)}/{len(checks)} checks)"
        if failed:
            line += " failed: " + ", ".join(failed)
        terminalreporter.write_line(line)
