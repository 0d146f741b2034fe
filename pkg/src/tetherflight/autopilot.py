"""Hierarchical onboard controller.

Low level: static state feedback for roll and pitch (gains from desired
closed-loop eigenvalues) and a squared-airspeed thrust law. High level:
course hold / target steering for the roll reference, a constant climb pitch
or an altitude P-law for the pitch reference, and a phase-dependent airspeed
reference. Nothing here integrates, so input saturation cannot wind up.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import DegenerateSpeed, UnstableRequest, ValidationError, ZeroGain
from .model import EPS_SPEED, GRAVITY, wrap_angle


@dataclass(frozen=True)
class ControllerConfig:
    roll_eig1: float = -2.7
    roll_eig2: float = -3.1
    pitch_eig1: float = -2.7
    pitch_eig2: float = -3.1
    K_m: float = 0.5
    K_roll: float = 1.0
    K_alt: float = 0.1
    launch_accel_threshold: float = 20.0
    takeoff_airspeed: float = 16.0
    takeoff_pitch: float = 0.69
    safe_altitude: float = 20.0
    R_min: float = 20.0
    flight_airspeed: float = 13.0
    Z_ref: float = 50.0
    target_1: tuple = (30.0, 55.0, 50.0)
    target_2: tuple = (-30.0, 40.0, 50.0)
    switch_tol: float = 0.5
    u_roll_min: float = -0.34
    u_roll_max: float = 0.34
    u_pitch_min: float = -0.34
    u_pitch_max: float = 0.34
    u_thrust_min: float = 0.0
    u_thrust_max: float = 20.0
    tether_max_length: float = 150.0
    detach_margin: float = 10.0
    gravity: float = GRAVITY

    def validate(self):
        for name in ("roll_eig1", "roll_eig2", "pitch_eig1", "pitch_eig2"):
            if not getattr(self, name) < 0:
                raise ValidationError(name, "closed-loop eigenvalue must be negative")
        for name in ("K_m", "K_roll", "K_alt", "R_min", "switch_tol", "takeoff_airspeed",
                     "flight_airspeed", "launch_accel_threshold", "tether_max_length",
                     "gravity"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be positive")
        # inner loops must be faster than the outer loops they serve
        if min(abs(self.roll_eig1), abs(self.roll_eig2)) <= self.K_roll:
            raise ValidationError("K_roll", "roll eigenvalues must be faster than K_roll")
        if min(abs(self.pitch_eig1), abs(self.pitch_eig2)) <= self.K_alt:
            raise ValidationError("K_alt", "pitch eigenvalues must be faster than K_alt")
        for lo, hi in (("u_roll_min", "u_roll_max"), ("u_pitch_min", "u_pitch_max"),
                       ("u_thrust_min", "u_thrust_max")):
            if not getattr(self, lo) < getattr(self, hi):
                raise ValidationError(hi, f"must exceed {lo}")
        if not 0 <= self.safe_altitude < self.Z_ref:
            raise ValidationError("safe_altitude", "need 0 <= safe_altitude < Z_ref")
        if not 0 <= self.detach_margin < self.tether_max_length:
            raise ValidationError("detach_margin", "must lie in [0, tether_max_length)")
        if len(self.target_1) != 3 or len(self.target_2) != 3:
            raise ValidationError("target_1", "targets are 3-vectors")


@dataclass(frozen=True)
class Gains:
    roll_e: float
    roll_edot: float
    pitch_e: float
    pitch_edot: float

    @classmethod
    def design(cls, model, config):
        ke_r, kd_r = gains_from_eigenvalues(model.a_roll, model.b_roll,
                                            config.roll_eig1, config.roll_eig2)
        ke_p, kd_p = gains_from_eigenvalues(model.a_pitch, model.b_pitch,
                                            config.pitch_eig1, config.pitch_eig2)
        return cls(ke_r, kd_r, ke_p, kd_p)


class FlightPhase(enum.Enum):
    ON_SLIDE = "OnSlide"
    CLIMB_OUT = "ClimbOut"
    FIGURE_EIGHT = "FigureEight"


class Target(enum.Enum):
    I = "I"
    II = "II"


class Safety(enum.Enum):
    OK = "ok"
    TETHER_DETACH = "TetherDetach"
    SENSOR_FAULT = "SensorFault"


@dataclass(frozen=True)
class Measurements:
    """What the onboard sensors deliver at one tick."""

    position: tuple
    velocity: tuple
    forward_accel: float
    roll: float
    roll_rate: float
    pitch: float
    pitch_rate: float
    airspeed: float

    @property
    def ground_speed(self):
        vx, vy, vz = self.velocity
        return math.sqrt(vx * vx + vy * vy + vz * vz)


@dataclass(frozen=True)
class PhaseState:
    phase: FlightPhase = FlightPhase.ON_SLIDE
    active_target: Target = Target.I
    takeoff_course: float = 0.0
    course: float = 0.0
    roll_ref: float = 0.0


@dataclass(frozen=True)
class References:
    roll: float = 0.0
    pitch: float = 0.0
    airspeed: float = 0.0
    course: float = 0.0


@dataclass(frozen=True)
class Command:
    refs: References
    u_roll: float
    u_pitch: float
    u_thrust: float


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def gains_from_eigenvalues(a, b, lam1, lam2):
    """State-feedback gains (K_e, K_edot) placing the tracking-error
    eigenvalues of a rate-damped double integrator at ``lam1``, ``lam2``.

    Closed loop is ``[[0, 1], [-b K_e, a - b K_edot]]``. A complex pair gives
    real gains.
    """
    if b == 0:
        raise ZeroGain("input gain b is zero")
    if complex(lam1).real >= 0 or complex(lam2).real >= 0:
        raise UnstableRequest(f"eigenvalues {lam1}, {lam2} must have negative real part")
    prod = lam1 * lam2
    total = lam1 + lam2
    if isinstance(prod, complex):
        if abs(prod.imag) > 1e-12 * max(1.0, abs(prod)) or abs(total.imag) > 1e-12 * max(1.0, abs(total)):
            raise UnstableRequest("complex eigenvalues must come as a conjugate pair")
        prod, total = prod.real, total.real
    return prod / b, (total - a) / (-b)


def closed_loop_matrix(a, b, k_e, k_edot):
    return [[0.0, 1.0], [-b * k_e, a - b * k_edot]]


def roll_loop(roll_ref, state, gains, config, roll_rate_ref=0.0):
    e = roll_ref - state.roll
    e_dot = roll_rate_ref - state.roll_rate
    return _clamp(gains.roll_e * e + gains.roll_edot * e_dot, config.u_roll_min, config.u_roll_max)


def pitch_loop(pitch_ref, state, gains, config, pitch_rate_ref=0.0):
    e = pitch_ref - state.pitch
    e_dot = pitch_rate_ref - state.pitch_rate
    return _clamp(gains.pitch_e * e + gains.pitch_edot * e_dot,
                  config.u_pitch_min, config.u_pitch_max)


def airspeed_loop(v_ref, v_a, config):
    u = config.K_m * (v_ref * v_ref - v_a * v_a)
    return _clamp(u, config.u_thrust_min, config.u_thrust_max)


def steady_airspeed(v_ref, K_m, drag_factor, d_force=0.0):
    """Closed-loop equilibrium of the squared-airspeed law against drag."""
    return math.sqrt((K_m * v_ref ** 2 + d_force) / (K_m + drag_factor))


def detect_launch(forward_accel, config):
    return forward_accel >= config.launch_accel_threshold


def course_angle(vx, vy):
    """Four-quadrant course angle of the horizontal velocity."""
    if math.hypot(vx, vy) <= EPS_SPEED:
        raise DegenerateSpeed("horizontal speed too small for a course angle")
    return math.atan2(vy, vx)


def roll_ref_bound(ground_speed, config):
    """Largest roll reference that keeps the turn radius above R_min."""
    return ground_speed ** 2 / (config.gravity * config.R_min)


def course_hold_roll_ref(course_ref, course, ground_speed, config):
    """Roll reference making the course a first-order lag with time constant
    1/K_roll, limited to the minimum-radius bank."""
    if ground_speed <= EPS_SPEED:
        raise DegenerateSpeed("ground speed too small for course hold")
    raw = config.K_roll * ground_speed / config.gravity * wrap_angle(course_ref - course)
    bound = roll_ref_bound(ground_speed, config)
    return _clamp(raw, -bound, bound)


def target_course_ref(position, target):
    dx = target[0] - position[0]
    dy = target[1] - position[1]
    return math.atan2(dy, dx)


def _projections(config, takeoff_course):
    c, s = math.cos(takeoff_course), math.sin(takeoff_course)
    s1 = config.target_1[0] * c + config.target_1[1] * s
    s2 = config.target_2[0] * c + config.target_2[1] * s
    return c, s, s1, s2


def switch_target(position, active, config, takeoff_course=0.0):
    """Two-point switching along the take-off direction.

    The aircraft is steered to the rear target once it passes the front one
    (within ``switch_tol``), and vice versa. In between the active target is
    kept.
    """
    c, s, s1, s2 = _projections(config, takeoff_course)
    proj = position[0] * c + position[1] * s
    front, back = (Target.I, Target.II) if s1 >= s2 else (Target.II, Target.I)
    s_front, s_back = max(s1, s2), min(s1, s2)
    if proj < s_back + config.switch_tol:
        return front
    if proj > s_front - config.switch_tol:
        return back
    return active


def target_position(target, config):
    return config.target_1 if target is Target.I else config.target_2


def farthest_target(position, config):
    d1 = math.dist(position[:2], config.target_1[:2])
    d2 = math.dist(position[:2], config.target_2[:2])
    return Target.I if d1 >= d2 else Target.II


def altitude_pitch_ref(z_ref, z, ground_speed, config):
    if ground_speed <= EPS_SPEED:
        raise DegenerateSpeed("ground speed too small for altitude control")
    return config.K_alt / ground_speed * (z_ref - z)


def phase_step(ps, meas, config):
    """Advance the phase machine one tick and emit references.

    Phases only move forward: OnSlide -> ClimbOut on launch detection,
    ClimbOut -> FigureEight at the safe altitude, where the target farthest
    from the aircraft becomes active.
    """
    speed = meas.ground_speed
    try:
        course = course_angle(meas.velocity[0], meas.velocity[1])
    except DegenerateSpeed:
        course = ps.course
    ps = replace(ps, course=course)

    if ps.phase is FlightPhase.ON_SLIDE:
        if not detect_launch(meas.forward_accel, config):
            return ps, References(course=ps.takeoff_course)
        ps = replace(ps, phase=FlightPhase.CLIMB_OUT)

    if ps.phase is FlightPhase.CLIMB_OUT and meas.position[2] >= config.safe_altitude:
        ps = replace(ps, phase=FlightPhase.FIGURE_EIGHT,
                     active_target=farthest_target(meas.position, config))
    elif ps.phase is FlightPhase.FIGURE_EIGHT:
        ps = replace(ps, active_target=switch_target(meas.position, ps.active_target, config,
                                                     ps.takeoff_course))

    if ps.phase is FlightPhase.CLIMB_OUT:
        course_ref = ps.takeoff_course
        pitch_ref = config.takeoff_pitch
        v_ref = config.takeoff_airspeed
    else:
        course_ref = target_course_ref(meas.position, target_position(ps.active_target, config))
        v_ref = config.flight_airspeed
        try:
            pitch_ref = altitude_pitch_ref(config.Z_ref, meas.position[2], speed, config)
        except DegenerateSpeed:
            pitch_ref = 0.0
    try:
        roll_ref = course_hold_roll_ref(course_ref, course, speed, config)
    except DegenerateSpeed:
        roll_ref = ps.roll_ref
    ps = replace(ps, roll_ref=roll_ref)
    return ps, References(roll=roll_ref, pitch=pitch_ref, airspeed=v_ref, course=course_ref)


def safety_checks(meas, config, distance=None):
    """Consistency checks on the measurements and the tether-length guard."""
    values = (*meas.position, *meas.velocity, meas.forward_accel, meas.roll, meas.roll_rate,
              meas.pitch, meas.pitch_rate, meas.airspeed)
    if not all(math.isfinite(v) for v in values):
        return Safety.SENSOR_FAULT
    if (abs(meas.roll) > math.pi / 2 or abs(meas.pitch) > math.pi / 2
            or not 0.0 <= meas.airspeed < 100.0):
        return Safety.SENSOR_FAULT
    if distance is None:
        distance = math.sqrt(sum(c * c for c in meas.position))
    if distance > config.tether_max_length - config.detach_margin:
        return Safety.TETHER_DETACH
    return Safety.OK


class Autopilot:
    """Onboard controller instance: gains plus the phase machine state."""

    def __init__(self, config, model, takeoff_course=0.0):
        self.config = config
        self.gains = Gains.design(model, config)
        self.state = PhaseState(takeoff_course=takeoff_course, course=takeoff_course)

    @property
    def phase(self):
        return self.state.phase

    def step(self, meas):
        self.state, refs = phase_step(self.state, meas, self.config)
        if self.state.phase is FlightPhase.ON_SLIDE:
            return Command(refs, 0.0, 0.0, 0.0)
        u_roll = roll_loop(refs.roll, meas, self.gains, self.config)
        u_pitch = pitch_loop(refs.pitch, meas, self.gains, self.config)
        u_thrust = airspeed_loop(refs.airspeed, meas.airspeed, self.config)
        return Command(refs, u_roll, u_pitch, u_thrust)
