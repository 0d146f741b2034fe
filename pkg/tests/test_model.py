import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tetherflight import model as fm
from tetherflight.errors import DegenerateSpeed, ValidationError
from tetherflight.model import AircraftState, AttitudeModelParams, DisturbanceInputs

P = AttitudeModelParams()


def test_defaults_validate():
    P.validate()


@pytest.mark.parametrize("field,value", [("a_roll", 0.5), ("a_pitch", 0.0), ("b_roll", -1.0),
                                         ("mass", 0.0), ("drag_coeff", -0.1)])
def test_invalid_params_name_the_key(field, value):
    from dataclasses import replace
    with pytest.raises(ValidationError) as info:
        replace(P, **{field: value}).validate()
    assert info.value.key == field


def test_roll_acceleration_examples():
    assert fm.roll_acceleration(AircraftState(), 0.0, P) == 0.0
    s = AircraftState(roll_rate=0.5)
    assert fm.roll_acceleration(s, 0.1, P) == pytest.approx(-2.3 * 0.5 + 12.6 * 0.1)
    assert fm.roll_acceleration(s, 0.1, P) == pytest.approx(0.11)
    assert fm.roll_acceleration(s, 0.1, P, d_roll=0.3) == pytest.approx(0.41)


def test_pitch_acceleration_examples():
    assert fm.pitch_acceleration(AircraftState(), 0.0, P) == 0.0
    assert fm.pitch_acceleration(AircraftState(pitch_rate=0.2), 0.05, P) == pytest.approx(0.57)


@pytest.mark.parametrize("channel,u,expected", [("roll", 0.1, 12.6 / 2.3 * 0.1),
                                                ("pitch", 0.05, 30 / 4.65 * 0.05)])
def test_rate_converges_to_steady_state(channel, u, expected):
    # integrate the rate equation alone and compare with -b u / a
    rate, h = 0.0, 1e-3
    fn = fm.roll_acceleration if channel == "roll" else fm.pitch_acceleration
    key = "roll_rate" if channel == "roll" else "pitch_rate"
    for _ in range(int(5.0 / h)):
        rate += h * fn(AircraftState(**{key: rate}), u, P)
    assert rate == pytest.approx(expected, rel=1e-3)
    assert expected == pytest.approx(0.5478 if channel == "roll" else 0.3226, abs=1e-4)


def test_rate_time_constant_matches_minus_one_over_a():
    # after t = -1/a the rate has covered 1 - 1/e of its way to steady state
    a, b, u = P.a_roll, P.b_roll, 0.1
    tau = -1.0 / a
    closed = -b / a * u * (1.0 - math.exp(-1.0))
    rate, h = 0.0, 1e-4
    for _ in range(int(round(tau / h))):
        rate += h * fm.roll_acceleration(AircraftState(roll_rate=rate), u, P)
    assert rate == pytest.approx(closed, rel=2e-3)


def test_turn_rate_examples():
    assert fm.turn_rate(AircraftState(ground_speed=13.0), P) == 0.0
    got = fm.turn_rate(AircraftState(ground_speed=13.0, roll=0.35), P)
    assert got == pytest.approx(9.81 / 13.0 * 0.35, rel=1e-12)
    # the rounded hand value 0.26409 agrees to within 0.01 %
    assert got == pytest.approx(0.26409, rel=1e-4)
    r = 1.0 / fm.curvature(AircraftState(ground_speed=13.0, roll=0.86136), P)
    assert r == pytest.approx(20.0, abs=1e-3)


def test_turn_rate_degenerate_speed():
    with pytest.raises(DegenerateSpeed):
        fm.turn_rate(AircraftState(ground_speed=fm.EPS_SPEED, roll=0.1), P)


@given(st.floats(0.6, 50.0), st.floats(-1.2, 1.2), st.floats(0.1, 10.0))
def test_turn_rate_odd_and_homogeneous(speed, roll, k):
    s = AircraftState(ground_speed=speed, roll=roll)
    neg = AircraftState(ground_speed=speed, roll=-roll)
    assert fm.turn_rate(neg, P) == pytest.approx(-fm.turn_rate(s, P))
    if k * speed > fm.EPS_SPEED:
        scaled = AircraftState(ground_speed=k * speed, roll=roll)
        assert fm.turn_rate(scaled, P) == pytest.approx(fm.turn_rate(s, P) / k, rel=1e-12, abs=1e-15)
    assert fm.curvature(s, P) == pytest.approx(P.gravity * roll / speed ** 2, rel=1e-12, abs=1e-15)


def test_vertical_rate_examples():
    assert fm.vertical_rate(AircraftState(ground_speed=12.0)) == 0.0
    assert fm.vertical_rate(AircraftState(ground_speed=12.0, pitch=0.69)) == pytest.approx(8.28)
    assert fm.vertical_rate(AircraftState(ground_speed=13.0, pitch=0.0769)) == pytest.approx(1.0, abs=1e-3)


def test_airspeed_derivative_examples():
    drag13 = 0.5 * 1.2 * 0.3 * 0.05 * 169
    assert drag13 == pytest.approx(1.5210)
    s = AircraftState(airspeed=13.0)
    assert fm.airspeed_derivative(s, drag13, P) == pytest.approx(0.0, abs=1e-12)
    assert fm.airspeed_derivative(s, 0.0, P) == pytest.approx(-1.2675)
    assert fm.airspeed_derivative(s, 1.521, P, tether_force=6.0) == pytest.approx(-5.0, abs=1e-3)


@given(st.floats(0.1, 40.0), st.floats(0.1, 40.0), st.floats(0.0, 20.0), st.floats(-0.5, 0.5))
def test_airspeed_derivative_decreasing_in_airspeed(v1, v2, u, pitch):
    lo, hi = sorted((v1, v2))
    if hi - lo < 1e-6:
        return
    f = lambda v: fm.airspeed_derivative(AircraftState(airspeed=v, pitch=pitch), u, P)
    assert f(hi) < f(lo)


def test_unique_equilibrium_airspeed():
    for u in (0.5, 5.0, 20.0):
        v_eq = math.sqrt(u / P.drag_factor)
        assert fm.airspeed_derivative(AircraftState(airspeed=v_eq), u, P) == pytest.approx(0.0, abs=1e-12)


def test_kinematics_examples():
    assert fm.kinematics_step(AircraftState(airspeed=13.0)) == pytest.approx((13, 0, 0, 13))
    got = fm.kinematics_step(AircraftState(airspeed=13.0, course=math.pi / 2), (2.0, 0.0, 0.0))
    assert got == pytest.approx((2.0, 13.0, 0.0, math.sqrt(173)), abs=1e-12)
    assert math.sqrt(173) == pytest.approx(13.153, abs=1e-3)
    got = fm.kinematics_step(AircraftState(airspeed=16.0, pitch=0.69))
    assert got[:3] == pytest.approx((16 * math.cos(0.69), 0.0, 16 * math.sin(0.69)), rel=1e-12)
    # the rounded hand values (12.336, 10.190) agree to within 0.1 %
    assert got[0] == pytest.approx(12.336, rel=1e-3) and got[2] == pytest.approx(10.190, rel=1e-3)


@given(st.floats(-20.0, 20.0))
def test_wrap_angle_range(angle):
    w = fm.wrap_angle(angle)
    assert -math.pi < w <= math.pi
    assert math.cos(w) == pytest.approx(math.cos(angle), abs=1e-9)
    assert math.sin(w) == pytest.approx(math.sin(angle), abs=1e-9)


def test_wrap_angle_boundary():
    assert fm.wrap_angle(math.pi) == pytest.approx(math.pi)
    assert fm.wrap_angle(-math.pi) == pytest.approx(math.pi)


def test_vector_roundtrip_and_airspeed_clipped():
    s = AircraftState(position=(1.0, 2.0, 3.0), course=0.3, roll=0.1, roll_rate=0.2, pitch=0.05,
                      pitch_rate=-0.1, airspeed=12.0)
    back = fm.vector_to_state(fm.state_to_vector(s))
    assert back.position == s.position and back.airspeed == s.airspeed and back.roll == s.roll
    assert back.ground_speed == pytest.approx(12.0)
    x = fm.state_to_vector(s)
    x[fm.AIRSPEED] = -1.0
    assert fm.vector_to_state(x).airspeed == 0.0


def test_plant_derivative_matches_pure_functions():
    s = AircraftState(position=(0, 0, 10), course=0.4, roll=0.2, roll_rate=0.1, pitch=0.05,
                      pitch_rate=-0.05, airspeed=13.0)
    s = fm.vector_to_state(fm.state_to_vector(s))
    d = DisturbanceInputs(d_roll=0.01, d_pitch=-0.02)
    u = (0.05, -0.03, 4.0)
    dx = fm.plant_derivative(fm.state_to_vector(s), u, P, d, 2.0)
    assert dx[:3] == pytest.approx(fm.kinematics_step(s)[:3])
    assert dx[fm.COURSE] == pytest.approx(fm.turn_rate(s, P))
    assert dx[fm.ROLL_RATE] == pytest.approx(fm.roll_acceleration(s, u[0], P, 0.01))
    assert dx[fm.PITCH_RATE] == pytest.approx(fm.pitch_acceleration(s, u[1], P, -0.02))
    assert dx[fm.AIRSPEED] == pytest.approx(fm.airspeed_derivative(s, u[2], P, tether_force=2.0))


def test_plant_derivative_slow_course_frozen():
    x = fm.state_to_vector(AircraftState(roll=0.3, airspeed=0.2))
    assert fm.plant_derivative(x, (0, 0, 0), P, DisturbanceInputs(), 0.0)[fm.COURSE] == 0.0


def test_energy_no_thrust_airspeed_non_increasing():
    from flight import fly, level
    t, X = fly(level(13.0), lambda t, s: (0.0, 0.0, None), 10.0)
    assert np.all(np.diff(X[:, fm.AIRSPEED]) <= 1e-12)


def test_path_length_equals_airspeed_integral():
    # thrust off, no wind, level: distance flown is the time integral of airspeed
    from flight import fly, level
    t, X = fly(level(13.0), lambda t, s: (0.0, None, None), 5.0, dt=0.01)
    steps = np.linalg.norm(np.diff(X[:, :3], axis=0), axis=1)
    integral = np.trapezoid(X[:, fm.AIRSPEED], t)
    assert steps.sum() == pytest.approx(integral, rel=1e-4)
