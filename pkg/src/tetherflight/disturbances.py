"""Seeded disturbance schedules: wind gusts, attitude noise, tether impulses."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import DisturbanceInputs, WindVector


@dataclass(frozen=True)
class DisturbanceSchedule:
    wind_mean: tuple = (0.0, 0.0, 0.0)
    gust_amplitude: float = 0.0
    gust_period: float = 10.0
    gust_direction: float = 0.0
    turbulence_sigma: float = 0.0
    turbulence_tau: float = 2.0
    roll_noise_sigma: float = 0.0
    pitch_noise_sigma: float = 0.0
    attitude_noise_tau: float = 0.5
    # tether force -> attitude channels [rad/s^2 per N]
    tether_pitch_coupling: float = -0.15
    tether_roll_coupling: float = 0.0
    impulses: bool = False
    impulse_peak_range: tuple = (3.0, 8.0)
    impulse_duration_range: tuple = (0.3, 0.7)
    impulse_interval_range: tuple = (6.0, 10.0)
    impulse_start: float = 20.0

    def validate(self):
        if len(self.wind_mean) != 3:
            raise ValidationError("wind_mean", "must be a 3-vector")
        wind = WindVector(self.wind_mean, self.gust_amplitude, self.gust_period,
                          self.gust_direction, self.turbulence_sigma, self.turbulence_tau)
        wind.validate()
        for name in ("roll_noise_sigma", "pitch_noise_sigma"):
            if getattr(self, name) < 0:
                raise ValidationError(name, "must be non-negative")
        if not self.attitude_noise_tau > 0:
            raise ValidationError("attitude_noise_tau", "must be positive")
        for name in ("impulse_peak_range", "impulse_duration_range", "impulse_interval_range"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi:
                raise ValidationError(name, "need 0 <= low <= high")
        lo_d, hi_d = self.impulse_duration_range
        if self.impulses and (lo_d <= 0 or self.impulse_interval_range[0] <= hi_d):
            raise ValidationError("impulse_interval_range", "impulses must not overlap")


@dataclass(frozen=True)
class Impulse:
    start: float
    duration: float
    peak: float

    def force(self, t):
        tau = t - self.start
        if 0.0 <= tau <= self.duration:
            return self.peak * math.sin(math.pi * tau / self.duration)
        return 0.0


def _filtered_noise(rng, n, dt, sigma, tau):
    """Stationary first-order Gauss-Markov sequence with std ``sigma``."""
    if sigma == 0.0:
        return np.zeros(n)
    phi = math.exp(-dt / tau)
    drive = rng.normal(0.0, sigma * math.sqrt(1.0 - phi * phi), n)
    out = np.empty(n)
    out[0] = rng.normal(0.0, sigma)
    for k in range(1, n):
        out[k] = phi * out[k - 1] + drive[k]
    return out


class DisturbanceField:
    """A schedule realised for one seed over ``[0, duration]``.

    All random draws happen here, up front, so evaluating the field at any
    time is deterministic and order independent.
    """

    def __init__(self, schedule, duration, seed=0, dt=0.02):
        self.schedule = schedule
        self.dt = dt
        rng = np.random.default_rng(seed)
        n = int(math.ceil(duration / dt)) + 2
        s = schedule
        self._n = n
        self._turb = np.stack([_filtered_noise(rng, n, dt, s.turbulence_sigma, s.turbulence_tau)
                               for _ in range(2)])
        self._att = np.stack([
            _filtered_noise(rng, n, dt, s.roll_noise_sigma, s.attitude_noise_tau),
            _filtered_noise(rng, n, dt, s.pitch_noise_sigma, s.attitude_noise_tau),
        ])
        self.impulses = []
        if s.impulses:
            t = s.impulse_start
            while t < duration:
                peak = rng.uniform(*s.impulse_peak_range)
                width = rng.uniform(*s.impulse_duration_range)
                self.impulses.append(Impulse(t, width, peak))
                t += rng.uniform(*s.impulse_interval_range)
        self._gust_phase = rng.uniform(0.0, 2.0 * math.pi) if s.gust_amplitude else 0.0

    def _sample(self, series, t):
        x = t / self.dt
        k = int(x)
        if k >= self._n - 1:
            return series[..., -1]
        frac = x - k
        return series[..., k] * (1.0 - frac) + series[..., k + 1] * frac

    def impulse_force(self, t):
        for imp in self.impulses:
            if imp.start <= t <= imp.start + imp.duration:
                return imp.force(t)
        return 0.0

    def wind(self, t):
        s = self.schedule
        wx, wy, wz = s.wind_mean
        if s.gust_amplitude:
            g = s.gust_amplitude * math.sin(2.0 * math.pi * t / s.gust_period + self._gust_phase)
            wx += g * math.cos(s.gust_direction)
            wy += g * math.sin(s.gust_direction)
        if s.turbulence_sigma:
            tx, ty = self._sample(self._turb, t)
            wx += tx
            wy += ty
        return wx, wy, wz


def inject_disturbance(field, t, tether_force=0.0):
    """Disturbances acting on the aircraft at time ``t``.

    ``tether_force`` is the spring-transmitted tether force; forced impulses
    from the schedule add to it, and the total is folded into the attitude
    channels through the coupling gains.
    """
    s = field.schedule
    total = tether_force + field.impulse_force(t)
    d_roll = s.tether_roll_coupling * total
    d_pitch = s.tether_pitch_coupling * total
    if s.roll_noise_sigma or s.pitch_noise_sigma:
        nr, npitch = field._sample(field._att, t)
        d_roll += nr
        d_pitch += npitch
    return DisturbanceInputs(d_roll=d_roll, d_pitch=d_pitch, d_airspeed_force=0.0,
                             tether_force_on_aircraft=total, wind=field.wind(t))
