import math
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from tetherflight.errors import ParseError, ScenarioInvalid, ValidationError
from tetherflight.scenario import (Scenario, load_scenario, nominal_scenario, parse_scenario,
                                   serialize_scenario)

ROOT = Path(__file__).resolve().parents[1]


def test_empty_text_gives_defaults():
    sc = parse_scenario("")
    assert sc == Scenario()
    assert sc.name == "nominal"
    assert sc.model.a_roll == -2.3 and sc.model.b_roll == 12.6
    assert set(sc.provenance.values()) == {"default"}


def test_provenance_marks_file_values():
    sc = parse_scenario("model.b_roll = 12.6\nsim.seed = 3\n")
    assert sc.provenance["model.b_roll"] == "file" and sc.provenance["sim.seed"] == "file"
    assert sc.provenance["model.a_roll"] == "default"
    assert sc.replace(**{"sim.seed": 4}).provenance["sim.seed"] == "override"


def test_negative_min_radius_names_the_key():
    with pytest.raises(ValidationError) as info:
        parse_scenario("controller.R_min = -5")
    assert "R_min" in info.value.key


def test_round_trip_single_key():
    sc = parse_scenario("model.b_roll = 12.6")
    assert parse_scenario(serialize_scenario(sc)) == sc
    assert parse_scenario(serialize_scenario(sc, only_changed=True)) == sc


def test_round_trip_changed_values():
    sc = nominal_scenario().replace(**{"controller.target_1": (31.5, 54.25, 49.0), "sim.seed": 12,
                                       "disturbance.impulses": True, "scenario.name": "x-1",
                                       "model.mass": 1.0 / 3.0})
    text = serialize_scenario(sc, only_changed=True)
    back = parse_scenario(text)
    assert back == sc and back.model.mass == 1.0 / 3.0


@settings(max_examples=40, deadline=None)
@given(st.floats(-50.0, -0.01), st.floats(0.01, 100.0), st.integers(0, 10 ** 9),
       st.floats(0.0, 2.0 * math.pi))
def test_round_trip_property(a, b, seed, course):
    sc = nominal_scenario().replace(**{"model.a_roll": a, "model.b_roll": b, "sim.seed": seed,
                                       "scenario.takeoff_course": course})
    assert parse_scenario(serialize_scenario(sc)) == sc


@pytest.mark.parametrize("text,err", [
    ("model.b_roll 12.6", ParseError),
    ("model.b_roll =", ParseError),
    ("model.nonsense = 1", ValidationError),
    ("nosection = 1", ValidationError),
    ("model.b_roll = 1\nmodel.b_roll = 2", ParseError),
    ("model.b_roll = twelve", ValidationError),
    ("controller.target_1 = 1, 2", ValidationError),
    ("disturbance.impulses = maybe", ValidationError),
])
def test_malformed_input(text, err):
    with pytest.raises(err):
        parse_scenario(text)


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError) as info:
        parse_scenario("# comment\n\nmodel.b_roll 1\n")
    assert info.value.lineno == 3


def test_cross_block_invariants():
    with pytest.raises(ScenarioInvalid):
        parse_scenario("controller.gravity = 9.8")
    with pytest.raises(ValidationError):
        parse_scenario("ground.control_period = 0.04")


def test_comments_and_whitespace():
    sc = parse_scenario("  # header\nsim.seed = 5   # trailing comment\n\n")
    assert sc.sim.seed == 5


def test_shipped_scenarios_load():
    files = sorted((ROOT / "scenarios").rglob("*.scn"))
    assert len(files) >= 3
    for path in files:
        load_scenario(path)
    assert load_scenario(ROOT / "scenarios" / "nominal.scn") == Scenario()


def test_packaged_nominal_matches_defaults():
    text = resources.files("tetherflight").joinpath("data/nominal.scn").read_text()
    assert parse_scenario(text) == nominal_scenario()
