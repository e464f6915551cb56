import json
import math

import numpy as np
import pytest

from levyleblond.fracops import FracParams
from levyleblond.lattice import LatticeSpec
from levyleblond.reports import ResidualReport
from levyleblond.verify import SUITES, VerifyConfig, run_suite


@pytest.mark.parametrize("suite", SUITES)
def test_suite_passes_on_defaults(suite):
    reports = run_suite(suite, VerifyConfig())
    assert reports
    for r in reports:
        assert r.passed, r.table()


def test_suite_on_other_lattice():
    cfg = VerifyConfig(spec=LatticeSpec(2, 8, 0.5), params=FracParams(0.75, -0.3))
    for r in run_suite("spectral", cfg) + run_suite("projections", cfg):
        assert r.passed, r.table()


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nonsense", VerifyConfig())


def test_report_bookkeeping():
    r = ResidualReport("demo")
    r.add("exact", 1e-14, 1e-12)
    r.add("info", 3.0)
    assert r.passed and r.check("info") is None
    r.add("nan", math.nan, 1.0)
    assert r.check("nan") is False and not r.passed
    body = json.loads(r.to_json())
    assert [c["check"] for c in body["checks"]] == ["exact", "info", "nan"]
    assert body["checks"][1]["tolerance"] is None
    assert r.table().startswith("[FAIL] demo")


def test_report_serialises_numpy_values():
    r = ResidualReport("np", metadata={"times": np.array([0.0, 0.5]), "z": 1 + 2j, "n": np.int64(3)})
    r.add("x", np.float64(0.5), 1)
    body = json.loads(r.to_json())
    assert body["metadata"]["n"] == 3 and body["metadata"]["times"] == [0.0, 0.5]
