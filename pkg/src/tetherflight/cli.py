"""Command-line entry points: simulate, identify, gains, batch."""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .autopilot import closed_loop_matrix, gains_from_eigenvalues
from .errors import ScenarioError, TelemetryFormatError, TetherFlightError
from .report import id_result_kv, id_result_text, metrics_kv, metrics_text
from .scenario import load_scenario
from .sim import run_scenario
from .sysid import DEFAULT_BOUNDS, identify, oracle_grid
from .telemetry import read_id_dataset, write_telemetry

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SAFETY = 3
EXIT_NOT_IDENTIFIED = 4

OUT_ENV = "TETHERFLIGHT_OUT"
SCENARIO_GLOB = "*.scn"


def _out_dir(arg):
    return Path(arg or os.environ.get(OUT_ENV) or "runs")


def outcome_exit_code(outcome):
    return {"ok": EXIT_OK, "safety": EXIT_SAFETY}[outcome]


def _run_to_dir(scenario, out, seed=None, duration=None):
    """Run one scenario, write telemetry and reports into ``out``."""
    result = run_scenario(scenario, seed=seed, duration=duration)
    out.mkdir(parents=True, exist_ok=True)
    telemetry = out / "telemetry.csv"
    count = write_telemetry(result.rows, telemetry)
    extra = {
        "scenario": scenario.name,
        "seed": result.seed,
        "outcome": result.outcome,
        "rows": count,
        "telemetry_sha256": hashlib.sha256(telemetry.read_bytes()).hexdigest(),
    }
    (out / "metrics.kv").write_text(metrics_kv(result.metrics, extra), encoding="utf-8")
    title = f"{scenario.name} seed {result.seed} ({result.outcome})"
    text = metrics_text(result.metrics, title)
    for t, name in result.events.safety:
        text += f"  safety event {name} at t={t:.2f} s\n"
    (out / "metrics.txt").write_text(text, encoding="utf-8")
    return result, extra, text


def cmd_simulate(args):
    try:
        scenario = load_scenario(args.scenario)
        if args.duration is not None and args.duration <= 0:
            raise ScenarioError("--duration must be positive")
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result, extra, text = _run_to_dir(scenario, _out_dir(args.out), args.seed, args.duration)
    sys.stdout.write(text)
    print(f"wrote {extra['rows']} telemetry rows to {_out_dir(args.out)}")
    return outcome_exit_code(result.outcome)


def cmd_identify(args):
    try:
        dataset = read_id_dataset(args.data, args.channel, args.kid)
    except (TelemetryFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    bounds = DEFAULT_BOUNDS
    if args.bounds is not None:
        a_lo, a_hi, b_lo, b_hi = args.bounds
        bounds = ((a_lo, a_hi), (b_lo, b_hi))
    try:
        oracle = oracle_grid(dataset, bounds, args.resolution) if args.resolution else None
        result = identify(dataset, bounds, oracle=oracle)
    except (ValueError, TetherFlightError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(id_result_text(result, args.channel))
    if args.kv:
        sys.stdout.write(id_result_kv(result, args.channel))
    return EXIT_OK if result.converged and not result.flat else EXIT_NOT_IDENTIFIED


def cmd_gains(args):
    try:
        k_e, k_edot = gains_from_eigenvalues(args.a, args.b, args.l1, args.l2)
    except TetherFlightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    eig = np.sort_complex(np.linalg.eigvals(np.array(closed_loop_matrix(args.a, args.b, k_e, k_edot))))
    print(f"K_e={k_e:.5f}")
    print(f"K_edot={k_edot:.5f}")
    shown = ", ".join(f"{e.real:.9g}" if abs(e.imag) < 1e-12 else f"{e:.9g}" for e in eig)
    print(f"closed_loop_eigenvalues={shown}")
    return EXIT_OK


def _batch_job(job):
    path, seed, out = job
    scenario = load_scenario(path)
    result, extra, _ = _run_to_dir(scenario, out, seed=seed)
    return extra, result.metrics


def batch_table(records):
    cols = ("scenario", "seed", "outcome", "t_safe", "alt_rms", "alt_max", "v_err",
            "F_peak", "period", "periodic")
    lines = ["  ".join(f"{c:>10}" for c in cols)]
    for extra, m in records:
        vals = (extra["scenario"], extra["seed"], extra["outcome"], m.time_to_safe_altitude,
                m.altitude_rms_error, m.altitude_max_error, m.airspeed_tracking_error,
                m.taut_peak_force, m.figure_eight_period, m.converged_to_periodic)
        lines.append("  ".join(f"{v:>10.3f}" if isinstance(v, float) else f"{v!s:>10}" for v in vals))
    return "\n".join(lines) + "\n"


def batch_aggregate(records):
    n = len(records)
    conv = sum(bool(m.converged_to_periodic) for _, m in records)
    safety = sum(extra["outcome"] != "ok" for extra, _ in records)
    lines = [f"runs={n}", f"converged={conv}", f"safety_outcomes={safety}"]
    for key in ("altitude_rms_error", "altitude_max_error", "airspeed_tracking_error",
                "taut_peak_force", "figure_eight_period"):
        vals = np.array([getattr(m, key) for _, m in records], dtype=float)
        vals = vals[np.isfinite(vals)]
        if vals.size:
            lines.append(f"{key}_mean={vals.mean():.6g} {key}_std={vals.std():.6g}")
    return "\n".join(lines) + "\n"


def cmd_batch(args):
    folder = Path(args.scenarios)
    paths = sorted(folder.glob(SCENARIO_GLOB)) if folder.is_dir() else []
    if not paths:
        print(f"error: no {SCENARIO_GLOB} files in {folder}", file=sys.stderr)
        return EXIT_INVALID
    if args.seeds < 1:
        print("error: --seeds must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        names = [load_scenario(p).name for p in paths]
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    root = _out_dir(args.out)
    jobs = [(p, s, root / name / f"seed_{s}") for p, name in zip(paths, names)
            for s in range(args.seeds)]
    workers = args.jobs or os.cpu_count() or 1
    if workers == 1:
        records = [_batch_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_batch_job, jobs))
    sys.stdout.write(batch_table(records))
    summary = batch_aggregate(records)
    sys.stdout.write(summary)
    (root / "batch_summary.kv").write_text(summary.replace(" ", "\n"), encoding="utf-8")
    return EXIT_SAFETY if any(e["outcome"] != "ok" for e, _ in records) else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="tetherflight",
                                     description="Tethered-aircraft take-off simulator and tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and write telemetry")
    p.add_argument("--scenario", required=True, help="scenario file")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./runs)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--duration", type=float, help="override the run length [s]")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("identify", help="identify (a, b) of a rate channel")
    p.add_argument("--data", required=True, help="dataset or telemetry CSV")
    p.add_argument("--channel", choices=("roll", "pitch"), default="roll")
    p.add_argument("--bounds", type=float, nargs=4, metavar=("A_LO", "A_HI", "B_LO", "B_HI"))
    p.add_argument("--kid", type=float, help="identification gain, required for telemetry logs")
    p.add_argument("--resolution", type=int, default=200,
                   help="oracle grid size per axis, 0 disables the oracle")
    p.add_argument("--kv", action="store_true", help="also print key=value lines")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("gains", help="pole-placement gains for one attitude loop")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--l1", type=float, required=True)
    p.add_argument("--l2", type=float, required=True)
    p.set_defaults(func=cmd_gains)

    p = sub.add_parser("batch", help="run every scenario in a folder for several seeds")
    p.add_argument("--scenarios", required=True, help=f"folder of {SCENARIO_GLOB} files")
    p.add_argument("--seeds", type=int, required=True, help="seeds 0..K-1 per scenario")
    p.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./runs)")
    p.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
