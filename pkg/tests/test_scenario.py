import json

import pytest

from latticecast.errors import ConfigError
from latticecast.scenario import Scenario, load_scenario, parse_scenario

BASE = {"p": 5, "K": 2, "n": 4, "ell": 1, "R": 0.6, "epsilon": 0.5, "trials": 10, "receivers": [{"S": [[1, 0]], "sigma2": 0.1}]}


def _with(**kw):
    return {**BASE, **kw}


def test_minimal_scenario_defaults():
    sc = parse_scenario({"K": 2, "n": 8, "R": 0.5, "epsilon": 1, "trials": 5, "receivers": [{"snr_db": 10}]})
    assert sc.p == "auto" and sc.ell == "auto" and sc.seed == 0
    assert sc.lattice.family == "Zn" and sc.lattice.scale == "covering"
    assert sc.enumeration_cap == 10**6 and sc.max_redraws == 100
    assert sc.receivers[0].S == [] and sc.receivers[0].noise_variance == pytest.approx(0.1)


@pytest.mark.parametrize(
    "data, path",
    [
        (_with(trials=0), "trials"),
        (_with(epsilon=0), "epsilon"),
        (_with(p=4), "p"),
        (_with(colour="red"), "colour"),
        (_with(lattice={"family": "A2"}), "lattice.family"),
        (_with(lattice={"scale": -1.0}), "lattice.scale"),
        (_with(seed=2**64), "seed"),
        (_with(receivers=[{"S": [], "sigma2": 1}, {"S": [[1, 0, 0]], "sigma2": 1}]), "receivers[1].S[0]"),
        (_with(receivers=[{"S": [], "sigma2": 1, "snr_db": 3}]), "receivers[0]"),
        (_with(receivers=[{"S": []}]), "receivers[0]"),
        (_with(receivers=[{"S": [], "sigma2": -1}]), "receivers[0].sigma2"),
        (_with(receivers=[]), "receivers"),
        (_with(network_mode=True), "network_sigma2"),
    ],
)
def test_config_errors_carry_field_paths(data, path):
    with pytest.raises(ConfigError) as info:
        parse_scenario(data)
    assert info.value.path == path


def test_network_mode_needs_no_receivers():
    sc = parse_scenario(_with(receivers=[], network_mode=True, network_snr_db=6.0))
    assert sc.network_noise_variance == pytest.approx(10**-0.6)


def test_load_scenario_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_scenario(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_scenario(arr)


def test_load_scenario_round_trip(tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps(BASE))
    assert load_scenario(f) == Scenario.model_validate(BASE)
