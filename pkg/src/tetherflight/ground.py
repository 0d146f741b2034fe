"""Ground station: slide launcher, spring/pulley tether coupling and winch.

The station never sees autopilot or aircraft-internal variables. Its only
input from the flying side is the tether geometry, i.e. where the tether end
is. Speeds of the winch are tether linear speeds [m/s] throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import OutOfRangeCompression, ValidationError


@dataclass(frozen=True)
class GroundStationParams:
    spring_stiffness: float = 60.0
    spring_max_compression: float = 0.32
    rail_length: float = 4.5
    slide_mass: float = 9.0
    tether_max_length: float = 150.0
    winch_drum_radius: float = 0.1
    # spring-compression zones of the winch law and their scaling anchors
    zone_low: float = 0.05
    zone_high: float = 0.15
    zone_low_anchor: float = 0.025
    zone_high_anchor: float = 0.235
    speed_min: float = -1.5
    speed_max: float = 20.0
    accel_reel_in: float = -8.0
    accel_reel_out: float = 60.0
    winch_tau: float = 0.02
    winch_accel_max: float = 300.0
    control_period: float = 0.02
    overcompression_factor: float = 100.0
    # proportional spring term added to the zone law [m/s per m of compression]
    spring_gain: float = 80.0
    spring_setpoint: float = 0.10
    initial_length: float = 0.0
    # slide launcher
    slide_peak_accel: float = 40.0
    slide_jerk: float = 400.0
    release_speed: float = 9.0
    slide_brake_decel: float = 40.0
    latch_slack_limit: float = 1.0

    @property
    def max_force(self):
        """Tether force with the spring fully compressed [N]."""
        return self.spring_stiffness * self.spring_max_compression / 2.0

    def validate(self):
        positive = ("spring_stiffness", "spring_max_compression", "rail_length", "slide_mass",
                    "tether_max_length", "winch_drum_radius", "winch_tau", "winch_accel_max",
                    "control_period", "overcompression_factor", "slide_peak_accel",
                    "slide_jerk", "release_speed", "slide_brake_decel", "latch_slack_limit")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be positive")
        prev_name, prev = "0", 0.0
        for name in ("zone_low_anchor", "zone_low", "zone_high", "zone_high_anchor",
                     "spring_max_compression"):
            value = getattr(self, name)
            if not value > prev:
                raise ValidationError(name, f"zone thresholds must satisfy {prev_name} < {name}")
            prev_name, prev = name, value
        if not self.speed_min < 0 < self.speed_max:
            raise ValidationError("speed_min", "need speed_min < 0 < speed_max")
        if not self.accel_reel_in < 0 < self.accel_reel_out:
            raise ValidationError("accel_reel_in", "need accel_reel_in < 0 < accel_reel_out")
        if self.spring_gain < 0:
            raise ValidationError("spring_gain", "must be non-negative")
        if not 0 <= self.spring_setpoint <= self.spring_max_compression:
            raise ValidationError("spring_setpoint", "must lie within the spring travel")
        if not 0 <= self.initial_length <= self.tether_max_length:
            raise ValidationError("initial_length", "must lie in [0, tether_max_length]")
        if self.launch_travel() > 2.0 or self.launch_travel() + self.brake_travel() > self.rail_length:
            raise ValidationError("release_speed", "launch profile does not fit on the rails")

    def launch_travel(self):
        return _slide_kinematics(_release_time(self), self)[2]

    def brake_travel(self):
        return self.release_speed ** 2 / (2.0 * self.slide_brake_decel)


@dataclass(frozen=True)
class GroundStationState:
    unreeled_length: float = 0.0
    winch_speed: float = 0.0
    winch_ref_speed: float = 0.0
    integral_ref: float = 0.0
    spring_compression: float = 0.0
    slide_position: float = 0.0
    slide_speed: float = 0.0
    launch_active: bool = True
    slack_length: float = 0.0
    tether_force: float = 0.0
    length_limited: bool = False


def winch_reference_speed(x_s, prev_ref, params):
    """Zone-based integral law for the reference reeling speed.

    Zone a (spring nearly released) ramps the reference down and never lets it
    stay positive, zone b holds it, zone c ramps it up and never lets it stay
    negative.
    """
    p = params
    if not 0.0 <= x_s <= p.spring_max_compression:
        raise OutOfRangeCompression(f"x_s={x_s!r} outside [0, {p.spring_max_compression}]")
    if x_s < p.zone_low:
        scaled = (x_s - p.zone_low) / (p.zone_low_anchor - p.zone_low)
        return min(0.0, max(p.speed_min, prev_ref + p.control_period * p.accel_reel_in * scaled))
    if x_s < p.zone_high:
        return prev_ref
    scaled = (x_s - p.zone_high) / (p.zone_high_anchor - p.zone_high)
    return max(0.0, min(p.speed_max, prev_ref + p.control_period * p.accel_reel_out * scaled))


def winch_track(state, params, dt):
    """Advance the speed-controlled winch by ``dt``.

    First-order tracking of ``winch_ref_speed`` with time constant
    ``winch_tau``; the per-step speed change is clamped by ``winch_accel_max``
    (motor torque limit). Returns ``(speed, length, length_limited)``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    w0, ref = state.winch_speed, state.winch_ref_speed
    w1 = ref + (w0 - ref) * math.exp(-dt / params.winch_tau)
    max_change = params.winch_accel_max * dt
    w1 = min(w0 + max_change, max(w0 - max_change, w1))
    length = state.unreeled_length + 0.5 * (w0 + w1) * dt
    limited = False
    if length >= params.tether_max_length:
        length, limited = params.tether_max_length, True
        w1 = min(w1, 0.0)
    elif length <= 0.0:
        length, limited = 0.0, True
        w1 = max(w1, 0.0)
    return w1, length, limited


def spring_force(excess, params):
    """(spring compression, tether force) for a tether ``excess`` metres longer
    than the unreeled length."""
    if excess <= 0.0:
        return 0.0, 0.0
    raw = excess / 2.0
    cap = params.spring_max_compression
    if raw <= cap:
        return raw, params.spring_stiffness * raw / 2.0
    stiff = params.overcompression_factor * params.spring_stiffness
    return cap, (params.spring_stiffness * cap + stiff * (raw - cap)) / 2.0


def station_reference_speed(x_s, slack, integral_ref, params):
    """Full reeling-speed reference: the zone law as integral part plus a
    proportional term on the spring compression while the tether is taut.

    Returns ``(reference, new_integral_ref)``.
    """
    integral = winch_reference_speed(x_s, integral_ref, params)
    ref = integral
    if slack <= 0.0 and x_s > 0.0:
        ref += params.spring_gain * (x_s - params.spring_setpoint)
    return min(params.speed_max, max(params.speed_min, ref)), integral


def tether_geometry(aircraft_pos, gs_origin, state, params):
    """Slack length, spring compression and tether force for a straight tether.

    The tether runs half-way around the spring pulley, so each metre of
    compression absorbs two metres of path and the spring force is twice the
    tether force. Past full compression a stiff end stop takes over.
    """
    excess = math.dist(aircraft_pos, gs_origin) - state.unreeled_length
    if excess <= 0.0:
        return -excess, 0.0, 0.0
    x_s, force = spring_force(excess, params)
    return 0.0, x_s, force


def _release_time(params):
    p = params
    t_ramp = p.slide_peak_accel / p.slide_jerk
    v_ramp = 0.5 * p.slide_jerk * t_ramp ** 2
    if p.release_speed <= v_ramp:
        return math.sqrt(2.0 * p.release_speed / p.slide_jerk)
    return t_ramp + (p.release_speed - v_ramp) / p.slide_peak_accel


def _slide_kinematics(t, params):
    """(accel, speed, position) of the slide ``t`` seconds after launch start."""
    p = params
    if t <= 0.0:
        return 0.0, 0.0, 0.0
    t_ramp = p.slide_peak_accel / p.slide_jerk
    t_rel = _release_time(p)
    if t < min(t_ramp, t_rel):
        return p.slide_jerk * t, 0.5 * p.slide_jerk * t ** 2, p.slide_jerk * t ** 3 / 6.0
    if t < t_rel:
        a = p.slide_peak_accel
        v1 = 0.5 * p.slide_jerk * t_ramp ** 2
        x1 = p.slide_jerk * t_ramp ** 3 / 6.0
        tau = t - t_ramp
        return a, v1 + a * tau, x1 + v1 * tau + 0.5 * a * tau ** 2
    if t_rel < t_ramp:
        v_r, x_r = 0.5 * p.slide_jerk * t_rel ** 2, p.slide_jerk * t_rel ** 3 / 6.0
    else:
        v1 = 0.5 * p.slide_jerk * t_ramp ** 2
        x1 = p.slide_jerk * t_ramp ** 3 / 6.0
        tau = t_rel - t_ramp
        v_r = v1 + p.slide_peak_accel * tau
        x_r = x1 + v1 * tau + 0.5 * p.slide_peak_accel * tau ** 2
    tau = t - t_rel
    t_stop = v_r / p.slide_brake_decel
    if tau < t_stop:
        return (-p.slide_brake_decel, v_r - p.slide_brake_decel * tau,
                x_r + v_r * tau - 0.5 * p.slide_brake_decel * tau ** 2)
    return 0.0, 0.0, x_r + 0.5 * v_r * t_stop


def slide_profile(t, params):
    """Trapezoidal launch profile: jerk-limited ramp, constant peak
    acceleration until the release speed, then braking on the rails.

    Returns ``(accel, speed, attached)``; the aircraft leaves the slide at the
    first instant the slide reaches ``release_speed``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    accel, speed, _ = _slide_kinematics(t, params)
    return accel, speed, t < _release_time(params)


def slide_position(t, params):
    return _slide_kinematics(t, params)[2]


class GroundStation:
    """Stateful wrapper running the station at its own control period.

    ``launch_time`` is when the slide starts; ``rail_direction`` is the
    take-off course [rad].
    """

    def __init__(self, params, origin=(0.0, 0.0, 0.0), rail_direction=0.0, launch_time=1.0):
        self.params = params
        self.origin = tuple(origin)
        self.rail_direction = rail_direction
        self.launch_time = launch_time
        self.state = GroundStationState(unreeled_length=params.initial_length)
        self.release_time = launch_time + _release_time(params)

    def aircraft_on_slide(self, t):
        """Aircraft position while attached, or None once released."""
        if t >= self.release_time:
            return None
        s = slide_position(max(0.0, t - self.launch_time), self.params)
        return (self.origin[0] + s * math.cos(self.rail_direction),
                self.origin[1] + s * math.sin(self.rail_direction),
                self.origin[2])

    def slide_accel_speed(self, t):
        tau = t - self.launch_time
        if tau <= 0.0:
            return 0.0, 0.0
        a, v, _ = slide_profile(tau, self.params)
        return a, v

    def step(self, t, aircraft_pos, dt, tethered=True):
        """One control tick at time ``t``. Returns the new state (valid at t+dt).

        The geometry fields of the returned state describe time ``t``; the
        winch fields describe ``t + dt``.
        """
        p = self.params
        st = self.state
        tau = t - self.launch_time
        slide_a, slide_v, attached = (0.0, 0.0, True) if tau <= 0 else slide_profile(tau, p)
        slide_x = slide_position(max(0.0, tau), p)
        if tethered:
            slack, x_s, force = tether_geometry(aircraft_pos, self.origin, st, p)
        else:
            slack, x_s, force = 0.0, 0.0, 0.0

        launch_active = st.launch_active
        if launch_active and not attached and (x_s >= p.zone_low or slack >= p.latch_slack_limit):
            launch_active = False

        if launch_active:
            # feed-forward latch: winch follows the slide, held at release speed after detach
            ref = slide_v if attached else max(slide_v, p.release_speed)
            integral = ref
            if attached:
                t1 = tau + dt
                length = p.initial_length + slide_position(max(0.0, t1), p)
                w1 = slide_profile(max(0.0, t1), p)[1]
                limited = False
            else:
                w1, length, limited = winch_track(replace(st, winch_ref_speed=ref), p, dt)
        else:
            ref, integral = station_reference_speed(x_s, slack, st.integral_ref, p)
            w1, length, limited = winch_track(replace(st, winch_ref_speed=ref), p, dt)

        self.state = GroundStationState(
            unreeled_length=length,
            winch_speed=w1,
            winch_ref_speed=ref,
            integral_ref=integral,
            spring_compression=x_s,
            slide_position=slide_x,
            slide_speed=slide_v,
            launch_active=launch_active,
            slack_length=slack,
            tether_force=force,
            length_limited=limited,
        )
        return self.state
