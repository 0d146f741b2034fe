"""Reduced flight model of the tethered glider.

Three decoupled modes: first-order roll and pitch rate dynamics driven by
aileron and elevator, a thrust/drag balance for the airspeed, and point-mass
kinematics where the roll angle sets the turn rate and the pitch angle sets
the climb rate. Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DegenerateSpeed, ValidationError

#: Below this ground speed [m/s] laws that divide by |p_dot| are not evaluated.
EPS_SPEED = 0.5
GRAVITY = 9.81


@dataclass(frozen=True)
class AttitudeModelParams:
    a_roll: float = -2.3
    b_roll: float = 12.6
    a_pitch: float = -4.65
    b_pitch: float = 30.0
    drag_coeff: float = 0.05
    air_density: float = 1.2
    ref_area: float = 0.3
    mass: float = 1.2
    gravity: float = GRAVITY
    stall_warning_speed: float = 7.0

    def validate(self):
        if not self.a_roll < 0:
            raise ValidationError("a_roll", "must be negative (stable rate dynamics)")
        if not self.a_pitch < 0:
            raise ValidationError("a_pitch", "must be negative (stable rate dynamics)")
        for name in ("b_roll", "b_pitch", "mass", "air_density", "ref_area", "gravity"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be positive")
        if not self.drag_coeff >= 0:
            raise ValidationError("drag_coeff", "must be non-negative")
        if not self.stall_warning_speed >= 0:
            raise ValidationError("stall_warning_speed", "must be non-negative")

    @property
    def drag_factor(self):
        """Lumped 0.5*rho*A*C_D [kg/m]."""
        return 0.5 * self.air_density * self.ref_area * self.drag_coeff


@dataclass(frozen=True)
class AircraftState:
    """Plant state. ``course`` is the heading of the air-relative velocity,
    which coincides with the measured course angle when there is no wind."""

    position: tuple = (0.0, 0.0, 0.0)
    ground_speed: float = 0.0
    course: float = 0.0
    roll: float = 0.0
    roll_rate: float = 0.0
    pitch: float = 0.0
    pitch_rate: float = 0.0
    airspeed: float = 0.0


@dataclass(frozen=True)
class WindVector:
    """Inertial wind [m/s] plus the parameters of the gust generator."""

    mean: tuple = (0.0, 0.0, 0.0)
    gust_amplitude: float = 0.0
    gust_period: float = 10.0
    gust_direction: float = 0.0
    turbulence_sigma: float = 0.0
    turbulence_tau: float = 2.0
    seed: int = 0

    def validate(self):
        if self.gust_amplitude < 0 or self.turbulence_sigma < 0:
            raise ValidationError("gust_amplitude", "amplitudes must be non-negative")
        if not self.gust_period > 0:
            raise ValidationError("gust_period", "must be positive")
        if not self.turbulence_tau > 0:
            raise ValidationError("turbulence_tau", "must be positive")


@dataclass(frozen=True)
class DisturbanceInputs:
    d_roll: float = 0.0
    d_pitch: float = 0.0
    d_airspeed_force: float = 0.0
    tether_force_on_aircraft: float = 0.0
    wind: tuple = field(default=(0.0, 0.0, 0.0))


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def roll_acceleration(state, u_roll, params, d_roll=0.0):
    return params.a_roll * state.roll_rate + params.b_roll * u_roll + d_roll


def pitch_acceleration(state, u_pitch, params, d_pitch=0.0):
    return params.a_pitch * state.pitch_rate + params.b_pitch * u_pitch + d_pitch


def turn_rate(state, params):
    """Yaw rate from the lift/weight/centrifugal balance, small roll angles.

    The simulator uses it as the course rate (small sideslip).
    """
    speed = state.ground_speed
    if speed <= EPS_SPEED:
        raise DegenerateSpeed(f"ground speed {speed:.3g} m/s <= {EPS_SPEED}")
    return params.gravity / speed * state.roll


def curvature(state, params):
    """Path curvature 1/R [1/m] implied by the current roll angle."""
    return turn_rate(state, params) / state.ground_speed


def vertical_rate(state):
    """Small-angle climb rate |p_dot| * theta (trim pitch taken as zero)."""
    return state.ground_speed * state.pitch


def airspeed_derivative(state, u_thrust, params, d_force=0.0, tether_force=0.0):
    v = state.airspeed
    drag = params.drag_factor * v * v
    weight = params.mass * params.gravity * math.sin(state.pitch)
    return (u_thrust - drag - weight - tether_force + d_force) / params.mass


def kinematics_step(state, wind=None):
    """Inertial velocity (vx, vy, vz, |v|) from airspeed, attitude and wind."""
    w = wind.mean if isinstance(wind, WindVector) else (wind or (0.0, 0.0, 0.0))
    v_h = state.airspeed * math.cos(state.pitch)
    vx = v_h * math.cos(state.course) + w[0]
    vy = v_h * math.sin(state.course) + w[1]
    vz = state.airspeed * math.sin(state.pitch) + w[2]
    return vx, vy, vz, math.sqrt(vx * vx + vy * vy + vz * vz)


# Flat plant vector used by the integrator: index layout below.
PX, PY, PZ, COURSE, ROLL, ROLL_RATE, PITCH, PITCH_RATE, AIRSPEED = range(9)


def state_to_vector(state):
    p = state.position
    return [p[0], p[1], p[2], state.course, state.roll, state.roll_rate,
            state.pitch, state.pitch_rate, state.airspeed]


def vector_to_state(x, wind=(0.0, 0.0, 0.0)):
    s = AircraftState(
        position=(x[PX], x[PY], x[PZ]),
        course=wrap_angle(x[COURSE]),
        roll=x[ROLL],
        roll_rate=x[ROLL_RATE],
        pitch=x[PITCH],
        pitch_rate=x[PITCH_RATE],
        airspeed=max(0.0, x[AIRSPEED]),
    )
    speed = kinematics_step(s, wind)[3]
    return AircraftState(s.position, speed, s.course, s.roll, s.roll_rate,
                         s.pitch, s.pitch_rate, s.airspeed)


def plant_derivative(x, inputs, params, dist, tether_force):
    """Time derivative of the flat plant vector.

    ``inputs`` is (u_roll, u_pitch, u_thrust). Hot path of the simulator, so it
    works on plain floats instead of going through the dataclasses.
    """
    u_roll, u_pitch, u_thrust = inputs
    wx, wy, wz = dist.wind
    course, roll, pitch = x[COURSE], x[ROLL], x[PITCH]
    v_a = x[AIRSPEED] if x[AIRSPEED] > 0.0 else 0.0
    v_h = v_a * math.cos(pitch)
    vx = v_h * math.cos(course) + wx
    vy = v_h * math.sin(course) + wy
    vz = v_a * math.sin(pitch) + wz
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)
    course_rate = params.gravity / speed * roll if speed > EPS_SPEED else 0.0
    g = params.gravity
    v_dot = (u_thrust - params.drag_factor * v_a * v_a - params.mass * g * math.sin(pitch)
             - tether_force + dist.d_airspeed_force) / params.mass
    if x[AIRSPEED] <= 0.0 and v_dot < 0.0:
        v_dot = 0.0
    return [
        vx, vy, vz,
        course_rate,
        x[ROLL_RATE],
        params.a_roll * x[ROLL_RATE] + params.b_roll * u_roll + dist.d_roll,
        x[PITCH_RATE],
        params.a_pitch * x[PITCH_RATE] + params.b_pitch * u_pitch + dist.d_pitch,
        v_dot,
    ]
