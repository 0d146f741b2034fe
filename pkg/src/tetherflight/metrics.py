"""Run metrics computed from telemetry and events."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .autopilot import roll_ref_bound
from .ground import slide_profile


@dataclass(frozen=True)
class RunMetrics:
    launch_detect_time: float = math.nan
    release_speed: float = math.nan
    release_travel: float = math.nan
    peak_slide_accel: float = math.nan
    time_to_safe_altitude: float = math.nan
    settle_start: float = math.nan
    altitude_rms_error: float = math.nan
    altitude_max_error: float = math.nan
    airspeed_mean: float = math.nan
    airspeed_tracking_error: float = math.nan
    turn_roll_ref_mean: float = math.nan
    turn_roll_mean: float = math.nan
    turn_ground_speed_mean: float = math.nan
    turn_fraction: float = 0.0
    taut_events: int = 0
    taut_peak_force: float = 0.0
    taut_max_duration: float = 0.0
    taut_mean_duration: float = 0.0
    impulse_events: int = 0
    impulse_peak_max: float = 0.0
    laps: int = 0
    figure_eight_period: float = math.nan
    lap_rms_difference: float = math.nan
    periodic_time: float = math.nan
    converged_to_periodic: bool = False
    safety_events: int = 0
    stall_warnings: int = 0

    def as_dict(self):
        return asdict(self)


def _segments(mask):
    """(start, stop) index pairs of the runs of True in ``mask``."""
    m = np.concatenate([[False], np.asarray(mask, bool), [False]])
    edges = np.flatnonzero(m[1:] != m[:-1])
    return list(zip(edges[::2], edges[1::2]))


def _resample(t, xyz, n=100):
    s = (t - t[0]) / (t[-1] - t[0])
    grid = np.linspace(0.0, 1.0, n)
    return np.stack([np.interp(grid, s, xyz[:, k]) for k in range(3)], axis=1)


def lap_differences(t, xyz, boundaries):
    """Relative RMS difference between each lap and the previous one.

    Returns the laps as ``(t0, t1, samples)`` and the differences as
    ``(start of previous lap, end of lap, value)``.

    A lap runs between consecutive boundary times. Laps are resampled on a
    common normalised time grid; the difference is scaled by the RMS spread of
    the newer lap about its centroid.
    """
    laps = []
    for t0, t1 in zip(boundaries[:-1], boundaries[1:]):
        sel = (t >= t0) & (t <= t1)
        if sel.sum() < 10:
            continue
        laps.append((t0, t1, _resample(t[sel], xyz[sel])))
    diffs = []
    for (p0, _, prev), (_, t1, cur) in zip(laps[:-1], laps[1:]):
        spread = math.sqrt(np.mean(np.sum((cur - cur.mean(axis=0)) ** 2, axis=1)))
        rms = math.sqrt(np.mean(np.sum((cur - prev) ** 2, axis=1)))
        diffs.append((p0, t1, rms / spread if spread > 0 else math.inf))
    return laps, diffs


def compute_metrics(result):
    sc = result.scenario
    cfg, ctrl, gp = sc.sim, sc.controller, sc.ground
    ev = result.events
    rows = result.rows
    if not rows:
        return RunMetrics()
    col = result.column
    t = col("t")
    out = {}

    # launch
    if ev.launch_detected is not None:
        out["launch_detect_time"] = ev.launch_detected
    tau = np.linspace(0.0, gp.launch_travel() / gp.release_speed * 4, 2001)
    prof = [slide_profile(x, gp) for x in tau]
    out["release_speed"] = gp.release_speed
    out["release_travel"] = gp.launch_travel()
    out["peak_slide_accel"] = max(a for a, _, attached in prof if attached)

    if ev.safe_altitude is not None and ev.launch_detected is not None:
        out["time_to_safe_altitude"] = ev.safe_altitude - ev.launch_detected
        settle = ev.safe_altitude + cfg.settle_time
        out["settle_start"] = settle
        sel = t >= settle
        if sel.any():
            z_err = np.abs(ctrl.Z_ref - col("p_z")[sel])
            out["altitude_rms_error"] = float(np.sqrt(np.mean(z_err ** 2)))
            out["altitude_max_error"] = float(z_err.max())
            va = col("airspeed")[sel]
            out["airspeed_mean"] = float(va.mean())
            out["airspeed_tracking_error"] = float(np.mean(np.abs(col("airspeed_ref")[sel] - va)))

        fe = col("phase") == "FigureEight"
        speed = col("ground_speed")
        bound = roll_ref_bound(speed, ctrl)
        phi_ref = np.abs(col("roll_ref"))
        turning = fe & (phi_ref >= bound * (1.0 - 1e-9)) & (speed > 1.0)
        if turning.any():
            out["turn_roll_ref_mean"] = float(phi_ref[turning].mean())
            out["turn_roll_mean"] = float(np.abs(col("roll")[turning]).mean())
            out["turn_ground_speed_mean"] = float(speed[turning].mean())
            out["turn_fraction"] = float(turning.sum() / max(1, fe.sum()))

    force = col("tether_force")
    segs = _segments(force > 0.0)
    if segs:
        dt = cfg.control_period * cfg.decimation
        durations = [(b - a) * dt for a, b in segs]
        out["taut_events"] = len(segs)
        out["taut_peak_force"] = float(force.max())
        out["taut_max_duration"] = float(max(durations))
        out["taut_mean_duration"] = float(np.mean(durations))
    imp = col("impulse_force")
    isegs = _segments(imp > 0.0)
    out["impulse_events"] = len(isegs)
    if isegs:
        out["impulse_peak_max"] = float(imp.max())

    # figure-eight laps, delimited by switches onto one of the two targets
    real = ev.switches[1:]
    if real:
        first = real[0][1]
        boundaries = [s for s, tgt in real if tgt == first]
        xyz = np.stack([col("p_x"), col("p_y"), col("p_z")], axis=1)
        laps, diffs = lap_differences(t, xyz, boundaries)
        out["laps"] = len(laps)
        if laps:
            out["figure_eight_period"] = float(np.mean([b - a for a, b, _ in laps]))
        if diffs:
            out["lap_rms_difference"] = float(diffs[-1][2])
            tol = cfg.periodic_tolerance
            k = len(diffs)
            while k > 0 and diffs[k - 1][2] < tol:
                k -= 1
            passing = len(diffs) - k
            if passing >= 2:
                # the trajectory is periodic from the start of the first matching pair
                out["periodic_time"] = float(diffs[k][0])
                out["converged_to_periodic"] = True

    out["safety_events"] = len(ev.safety)
    out["stall_warnings"] = ev.stall_warnings
    return RunMetrics(**out)
