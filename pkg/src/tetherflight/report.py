"""Plain-text and key=value renderings of run metrics and identification results."""
from __future__ import annotations

import math

from .telemetry import format_value

# metrics shown in degrees in the human-readable report
_ANGLE_KEYS = {"turn_roll_ref_mean", "turn_roll_mean"}


def _kv_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "nan" if math.isnan(value) else format_value(value)
    return str(value)


def metrics_kv(metrics, extra=None):
    """Line-delimited ``key=value`` text, one metric per line, SI units."""
    items = dict(extra or {})
    items.update(metrics.as_dict())
    return "".join(f"{k}={_kv_value(v)}\n" for k, v in items.items())


def parse_kv(text):
    out = {}
    for line in text.splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def metrics_text(metrics, title="run"):
    lines = [f"== {title} =="]
    for key, value in metrics.as_dict().items():
        if key in _ANGLE_KEYS and isinstance(value, float) and not math.isnan(value):
            shown = f"{math.degrees(value):.2f} deg"
        elif isinstance(value, float):
            shown = "n/a" if math.isnan(value) else f"{value:.4g}"
        else:
            shown = _kv_value(value)
        lines.append(f"  {key:<26} {shown}")
    return "\n".join(lines) + "\n"


def id_result_kv(result, channel):
    fields = {
        "channel": channel,
        "a_hat": result.a_hat,
        "b_hat": result.b_hat,
        "cost": result.cost,
        "converged": result.converged,
        "iterations": result.iterations,
        "flat": result.flat,
    }
    return "".join(f"{k}={_kv_value(v)}\n" for k, v in fields.items())


def id_result_text(result, channel):
    status = "converged" if result.converged else "NOT converged"
    if result.flat:
        status += " (flat cost surface, no excitation)"
    return (f"{channel} channel: a = {result.a_hat:.6g} 1/s, b = {result.b_hat:.6g} 1/s^2\n"
            f"cost {result.cost:.6g} after {result.iterations} evaluations, {status}\n")
