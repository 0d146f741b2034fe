"""Fixed-step co-simulation of aircraft, ground station and autopilot.

The controller and the ground station run at ``control_period`` with
zero-order hold; the aircraft is integrated at ``dt`` (a divisor of the
control period) with RK4 or Euler. Given a seed, a run is bit-for-bit
reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import model as fm
from .autopilot import Autopilot, FlightPhase, Measurements, Safety, safety_checks
from .disturbances import DisturbanceField, inject_disturbance
from .errors import ValidationError
from .ground import GroundStation, spring_force

TELEMETRY_COLUMNS = (
    "t", "phase", "target",
    "p_x", "p_y", "p_z", "v_x", "v_y", "v_z", "ground_speed", "course",
    "roll", "roll_rate", "pitch", "pitch_rate", "airspeed", "forward_accel",
    "roll_ref", "pitch_ref", "airspeed_ref", "course_ref",
    "u_roll", "u_pitch", "u_thrust",
    "spring_compression", "winch_speed", "winch_ref_speed", "unreeled_length",
    "slack_length", "tether_force", "impulse_force", "distance",
    "slide_position", "slide_speed",
    "wind_x", "wind_y", "wind_z", "d_roll", "d_pitch",
)
COLUMN_INDEX = {name: i for i, name in enumerate(TELEMETRY_COLUMNS)}


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.02
    control_period: float = 0.02
    duration: float = 120.0
    integrator: str = "rk4"
    seed: int = 0
    launch_time: float = 1.0
    measurement_noise: bool = False
    noise_attitude: float = math.radians(0.5)
    noise_rate: float = math.radians(0.5)
    noise_position: float = 0.5
    noise_airspeed: float = 0.3
    decimation: int = 1
    settle_time: float = 30.0
    periodic_tolerance: float = 0.15

    def validate(self):
        if not self.dt > 0:
            raise ValidationError("dt", "must be positive")
        if not self.duration >= self.dt:
            raise ValidationError("duration", "must be at least one step")
        ratio = self.control_period / self.dt
        if not (self.control_period > 0 and abs(ratio - round(ratio)) < 1e-9 and round(ratio) >= 1):
            raise ValidationError("control_period", "must be an integer multiple of dt")
        if self.integrator not in ("rk4", "euler"):
            raise ValidationError("integrator", "must be 'rk4' or 'euler'")
        if self.launch_time < 0:
            raise ValidationError("launch_time", "must be non-negative")
        if self.decimation < 1:
            raise ValidationError("decimation", "must be >= 1")
        for name in ("noise_attitude", "noise_rate", "noise_position", "noise_airspeed",
                     "settle_time"):
            if getattr(self, name) < 0:
                raise ValidationError(name, "must be non-negative")
        if not 0 < self.periodic_tolerance < 1:
            raise ValidationError("periodic_tolerance", "must lie in (0, 1)")

    @property
    def substeps(self):
        return int(round(self.control_period / self.dt))

    @property
    def ticks(self):
        return int(round(self.duration / self.control_period))


@dataclass
class Events:
    launch_detected: float | None = None
    released: float | None = None
    safe_altitude: float | None = None
    switches: list = field(default_factory=list)
    safety: list = field(default_factory=list)
    stall_warnings: int = 0
    length_limited: int = 0


class World:
    """Mutable world state for one run."""

    def __init__(self, scenario, seed=None, duration=None):
        scenario.validate()
        self.scenario = scenario
        cfg = scenario.sim
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.duration = cfg.duration if duration is None else duration
        self.rng = np.random.default_rng([self.seed, 1])
        info = scenario.info
        rail = info.takeoff_course
        # course estimate latched on the slide before the launch
        course_est = rail + (self.rng.normal(0.0, info.takeoff_course_noise)
                             if info.takeoff_course_noise else 0.0)
        self.params = scenario.model
        self.autopilot = Autopilot(scenario.controller, scenario.model, takeoff_course=course_est)
        self.gs = GroundStation(scenario.ground, info.gs_origin, rail, cfg.launch_time)
        self.field = DisturbanceField(scenario.disturbance, self.duration + cfg.control_period,
                                      seed=self.seed, dt=cfg.control_period)
        self.t = 0.0
        self.tick = 0
        self.attached = True
        self.tethered = True
        self.terminated = False
        self.x = fm.state_to_vector(fm.AircraftState(position=tuple(info.gs_origin), course=rail))
        self.inputs = (0.0, 0.0, 0.0)
        self.forward_accel = 0.0
        self.events = Events()

    # -- helpers -----------------------------------------------------------
    def _tether_force(self, pos, length):
        if not self.tethered or self.attached:
            return 0.0
        return spring_force(math.dist(pos, self.gs.origin) - length, self.gs.params)[1]

    def _derivative(self, x, t, length):
        pos = (x[0], x[1], x[2])
        force = self._tether_force(pos, length)
        dist = inject_disturbance(self.field, t, force)
        return fm.plant_derivative(x, self.inputs, self.params, dist,
                                   dist.tether_force_on_aircraft)

    def _integrate(self, t0, h, len0, len_rate):
        x = self.x
        if self.cfg.integrator == "euler":
            k1 = self._derivative(x, t0, len0)
            self.x = [xi + h * ki for xi, ki in zip(x, k1)]
            return
        half = 0.5 * h
        k1 = self._derivative(x, t0, len0)
        x2 = [xi + half * ki for xi, ki in zip(x, k1)]
        k2 = self._derivative(x2, t0 + half, len0 + half * len_rate)
        x3 = [xi + half * ki for xi, ki in zip(x, k2)]
        k3 = self._derivative(x3, t0 + half, len0 + half * len_rate)
        x4 = [xi + h * ki for xi, ki in zip(x, k3)]
        k4 = self._derivative(x4, t0 + h, len0 + h * len_rate)
        self.x = [xi + h / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                  for xi, a, b, c, d in zip(x, k1, k2, k3, k4)]

    def _release(self):
        """Hand the aircraft over from the slide to free flight."""
        gp = self.gs.params
        rail = self.gs.rail_direction
        self.attached = False
        self.events.released = self.gs.release_time
        lag = self.t - self.gs.release_time
        travel = gp.launch_travel() + gp.release_speed * lag
        o = self.gs.origin
        w = self.field.wind(self.t)
        v_air = max(0.0, gp.release_speed - (w[0] * math.cos(rail) + w[1] * math.sin(rail)))
        self.x = [o[0] + travel * math.cos(rail), o[1] + travel * math.sin(rail), o[2],
                  rail, 0.0, 0.0, 0.0, 0.0, v_air]

    def aircraft_state(self):
        if self.attached:
            _, v = self.gs.slide_accel_speed(self.t)
            pos = self.gs.aircraft_on_slide(self.t)
            return fm.AircraftState(position=pos, ground_speed=v, course=self.gs.rail_direction,
                                    airspeed=v)
        return fm.vector_to_state(self.x, self.field.wind(self.t))

    def measure(self, state):
        if self.attached:
            a, v = self.gs.slide_accel_speed(self.t)
            rail = self.gs.rail_direction
            vel = (v * math.cos(rail), v * math.sin(rail), 0.0)
            accel = a
        else:
            vel = fm.kinematics_step(state, self.field.wind(self.t))[:3]
            accel = self.forward_accel
        m = Measurements(state.position, vel, accel, state.roll, state.roll_rate,
                         state.pitch, state.pitch_rate, state.airspeed)
        if not self.cfg.measurement_noise or self.attached:
            return m
        c, r = self.cfg, self.rng
        return Measurements(
            tuple(p + r.normal(0.0, c.noise_position) for p in m.position),
            m.velocity, m.forward_accel,
            m.roll + r.normal(0.0, c.noise_attitude), m.roll_rate + r.normal(0.0, c.noise_rate),
            m.pitch + r.normal(0.0, c.noise_attitude), m.pitch_rate + r.normal(0.0, c.noise_rate),
            max(0.0, m.airspeed + r.normal(0.0, c.noise_airspeed)),
        )


def step_world(world):
    """One controller tick. Returns the telemetry row describing time ``t``
    (state, commands issued at ``t``, ground-station geometry at ``t``)."""
    w = world
    cfg = w.cfg
    T = cfg.control_period
    if w.attached and w.t >= w.gs.release_time:
        w._release()
    state = w.aircraft_state()
    meas = w.measure(state)
    status = safety_checks(meas, w.autopilot.config, math.dist(state.position, w.gs.origin))
    if status is Safety.SENSOR_FAULT:
        w.events.safety.append((w.t, status.value))
        w.terminated = True
    elif status is Safety.TETHER_DETACH and w.tethered:
        w.events.safety.append((w.t, status.value))
        w.tethered = False

    prev_phase, prev_target = w.autopilot.phase, w.autopilot.state.active_target
    cmd = w.autopilot.step(meas)
    ap = w.autopilot.state
    if prev_phase is FlightPhase.ON_SLIDE and ap.phase is not FlightPhase.ON_SLIDE:
        w.events.launch_detected = w.t
    if ap.phase is FlightPhase.FIGURE_EIGHT:
        if prev_phase is not FlightPhase.FIGURE_EIGHT:
            w.events.safe_altitude = w.t
            w.events.switches.append((w.t, ap.active_target.value))
        elif ap.active_target is not prev_target:
            w.events.switches.append((w.t, ap.active_target.value))
    w.inputs = (cmd.u_roll, cmd.u_pitch, cmd.u_thrust)

    length0 = w.gs.state.unreeled_length
    gs = w.gs.step(w.t, state.position, T, tethered=w.tethered)
    if gs.length_limited and not gs.launch_active:
        w.events.length_limited += 1
    dist = inject_disturbance(w.field, w.t, gs.tether_force if not w.attached else 0.0)
    if not w.attached and state.airspeed < w.params.stall_warning_speed:
        w.events.stall_warnings += 1

    vel = meas.velocity if w.attached else fm.kinematics_step(state, dist.wind)[:3]
    row = (
        w.t, ap.phase.value, ap.active_target.value,
        *state.position, *vel, math.sqrt(sum(v * v for v in vel)), state.course,
        state.roll, state.roll_rate, state.pitch, state.pitch_rate, state.airspeed,
        meas.forward_accel,
        cmd.refs.roll, cmd.refs.pitch, cmd.refs.airspeed, cmd.refs.course,
        cmd.u_roll, cmd.u_pitch, cmd.u_thrust,
        gs.spring_compression, gs.winch_speed, gs.winch_ref_speed, length0,
        gs.slack_length, gs.tether_force, w.field.impulse_force(w.t) if not w.attached else 0.0,
        math.dist(state.position, w.gs.origin),
        gs.slide_position, gs.slide_speed,
        *dist.wind, dist.d_roll, dist.d_pitch,
    )

    if not w.attached and not w.terminated:
        h = cfg.dt
        rate = (gs.unreeled_length - length0) / T
        for k in range(cfg.substeps):
            t0 = w.t + k * h
            w._integrate(t0, h, length0 + rate * k * h, rate)
        x = w.x
        x[fm.COURSE] = fm.wrap_angle(x[fm.COURSE])
        if x[fm.AIRSPEED] < 0.0:
            x[fm.AIRSPEED] = 0.0
        # accelerometer along the body axis, for the next tick's measurement
        w.forward_accel = w._derivative(x, w.t + T, gs.unreeled_length)[fm.AIRSPEED]
    w.tick += 1
    w.t = w.tick * T
    return row


@dataclass
class RunResult:
    scenario: object
    seed: int
    rows: list
    events: Events
    metrics: object = None

    @property
    def outcome(self):
        return "safety" if self.events.safety else "ok"

    def column(self, name):
        i = COLUMN_INDEX[name]
        return np.array([r[i] for r in self.rows])


def run_scenario(scenario, sim_config=None, seed=None, duration=None):
    """Run to the configured duration (or a SensorFault) and compute metrics."""
    from .metrics import compute_metrics

    if sim_config is not None:
        scenario = scenario.replace(**{f"sim.{f}": getattr(sim_config, f)
                                       for f in sim_config.__dataclass_fields__})
    world = World(scenario, seed=seed, duration=duration)
    rows = []
    ticks = int(round(world.duration / world.cfg.control_period))
    dec = world.cfg.decimation
    for k in range(ticks + 1):
        row = step_world(world)
        if k % dec == 0:
            rows.append(row)
        if world.terminated:
            break
    result = RunResult(scenario, world.seed, rows, world.events)
    result.metrics = compute_metrics(result)
    return result
