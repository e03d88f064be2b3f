import math

import numpy as np
import pytest

import mhd2d

SMALL = {
    "grid": {"plasma_radial": 16, "plasma_angular": 32, "vacuum_radial": 16},
    "time": {"dt": 1e-3, "t_end": 0.01},
    "monitor": {"energy_every": 5},
}


def test_check_names():
    names = mhd2d.check_names()
    assert "gauss_disk" in names
    assert names == sorted(names)


def test_config_round_trip(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('scenario = "static-zpinch"\n[time]\ndt = 0.002\nt_end = 0.01\n')
    c = mhd2d.load_config(path)
    assert c["scenario"] == "static-zpinch"
    assert c["time"]["dt"] == 0.002
    assert mhd2d.load_config(c) == c


def test_bad_config_raises_with_kind():
    with pytest.raises(mhd2d.Error) as info:
        mhd2d.load_config({"time": {"dt": -1.0}})
    assert info.value.kind == "ConfigurationError"
    with pytest.raises(mhd2d.Error):
        mhd2d.load_config({"no_such_section": {}})


def test_zpinch_run_is_stationary():
    r = mhd2d.run(SMALL, scenario="static-zpinch")
    assert r["steps"] == 10
    assert math.isclose(r["t"], 0.01)
    assert r["e0_drift"] < 1e-12
    assert r["volume_drift"] < 1e-12
    assert not r["sign_violated"]
    assert np.allclose(r["energy"]["taylor_margin"], 1.0)


def test_perturbed_interface_and_determinism():
    a = mhd2d.run(SMALL)
    b = mhd2d.run(SMALL)
    assert a["energy_csv"] == b["energy_csv"]
    assert a["e0_drift"] < 1e-6
    assert a["T_obs"] > 0.0
    assert isinstance(a["energy"]["E0"], np.ndarray)
    assert len(a["energy"]["t"]) == 3


def test_verify_selected_checks():
    reports = mhd2d.verify(["gauss_disk", "pressure_identity"], seed=1)
    assert [r["check_name"] for r in reports] == ["gauss_disk", "pressure_identity"]
    assert all(r["status"] == "passed" for r in reports)
    with pytest.raises(mhd2d.Error):
        mhd2d.verify(["no_such_check"])


def test_refine():
    reports = mhd2d.refine(SMALL, levels=2, scenario="static-zpinch")
    assert {r["check_name"] for r in reports} >= {"energy_drift", "stationarity"}
