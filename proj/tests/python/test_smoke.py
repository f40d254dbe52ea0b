import math

import pytest

import tracestokes as ts


def test_version():
    assert ts.__version__ == "0.1.0"


def test_sphere_area_close_to_exact():
    area = ts.area("sphere", level=2, m=2)
    assert abs(area - 4.0 * math.pi) <= 0.02 * 4.0 * math.pi


def test_infsup_returns_ordered_spectrum_edges():
    out = ts.infsup("sphere", level=2, stabilization="normal")
    assert out["m"] > 0
    assert abs(out["lambda1"]) <= 1e-10 * out["lambda_m"]
    assert 0.0 < out["lambda2"] <= out["lambda_m"]


def test_converge_solves_the_manufactured_problem():
    out = ts.converge(level=2)
    assert out["iterations"] > 0
    assert out["l2_u"] < 0.2
    assert out["l2_p"] < 1.0


def test_study_returns_csv_with_config_echo():
    csv = ts.study("diagnose", overrides=["levels=2", "surface=sphere"])
    lines = csv.splitlines()
    assert any(line.startswith("# surface = sphere") for line in lines)
    header = next(line for line in lines if not line.startswith("#"))
    assert header.split(",")[0] == "level"


def test_bad_config_raises_value_error():
    with pytest.raises(ValueError):
        ts.study("infsup", overrides=["no_such_key=1"])
    with pytest.raises(ValueError):
        ts.study("nonsense")
