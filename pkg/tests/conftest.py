import numpy as np
import pytest

from levyleblond.lattice import LatticeField, LatticeSpec

_ACCEPTANCE: dict[str, str] = {}


def random_field(spec: LatticeSpec, rng, blades=(0,), mean_zero=False) -> LatticeField:
    shape = spec.shape + (len(blades),)
    f = LatticeField(spec, blades, rng.normal(size=shape) + 1j * rng.normal(size=shape))
    if mean_zero:
        f = LatticeField(spec, f.blades, f.data - f.mean())
    return f


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {name}")
