import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavityswap.config import ConfigError, RunConfig
from cavityswap.hilbert import build_basis


def test_defaults_are_reference_configuration():
    c = RunConfig()
    assert (c.protocol, c.omega_max_tp, c.g1_tp, c.g2_tp, c.intra_delay) == ("swap8", 10.0, 25.0, 25.0, 1.2)
    assert c.loss.lossless
    s = c.build_schedule()
    assert s.omega_max == 10.0 and s.g == (25.0, 25.0)
    assert c.target_name == "swap"


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["swap8", "swap7", "cnot11"]), st.floats(0, 50), st.floats(0.1, 3),
       st.floats(0, 0.1), st.sampled_from(["01;0", "10;0", {"01;0": [1.0, 0.0], "10;0": [0.0, 1.0]}]),
       st.dictionaries(st.sampled_from(["omega_max_tp", "g_tp"]), st.lists(st.floats(1, 50), max_size=3)))
def test_json_round_trip(protocol, omega, delay, gamma, initial, scan):
    c = RunConfig(protocol=protocol, omega_max_tp=omega, intra_delay=delay, gamma_e=gamma, initial=initial,
                  scan=scan)
    assert RunConfig.from_json(json.dumps(c.to_dict())) == c


@pytest.mark.parametrize("patch,field", [
    ({"protocol": "swap9"}, "protocol"),
    ({"omega_max_tp": -1}, "omega_max_tp"),
    ({"intra_delay": 0}, "intra_delay"),
    ({"n_max": 1}, "n_max"),
    ({"dt": -0.1}, "dt"),
    ({"target": "toffoli"}, "target"),
    ({"scan": {"speed": [1]}}, "scan"),
    ({"stride": 0}, "stride"),
])
def test_invalid_fields_named(patch, field):
    with pytest.raises(ConfigError, match=field):
        RunConfig.from_dict(patch)


def test_unknown_field():
    with pytest.raises(ConfigError, match="unknown field"):
        RunConfig.from_dict({"omega": 3})


def test_json_syntax_error_reports_line():
    with pytest.raises(ConfigError, match="line 3"):
        RunConfig.from_json('{\n  "protocol": "swap8",\n  "n_max": ,\n}')


def test_initial_amplitude_map():
    c = RunConfig(initial={"01;0": [1.0, 0.0], "10;0": [0.0, 1.0]})
    psi = c.initial_state(build_basis(3))
    assert psi.population("10;0") == pytest.approx(0.5)
    with pytest.raises(ConfigError, match="initial"):
        RunConfig(initial="zz;0").initial_state(build_basis(3))


def test_custom_schedule_overrides_protocol():
    base = RunConfig(protocol="swap7").build_schedule()
    c = RunConfig(schedule=base.to_dict())
    assert c.build_schedule() == base
    with pytest.raises(ConfigError):
        RunConfig(schedule={"pulses": []}).build_schedule()


def test_thresholds():
    assert RunConfig().fidelity_threshold == 0.99
    assert RunConfig(protocol="cnot11").fidelity_threshold == 0.98
    assert RunConfig(min_fidelity=0.5).fidelity_threshold == 0.5
