"""Command-line harness: ``carl-sim {simulate,analytic,sweep,compare,analyze}``.

Exit codes: 0 success, 1 validation error, 2 numerical failure (including a
comparison that misses its tolerance).
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytic, observables
from .config import ConfigError, Scenario, load_params, load_scenario, load_sweep
from .dynamics import CSV_COLUMNS, IntegrationError, TimeSeries, run_scenario
from .params import SystemParams, stationary_pump

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

STEADY_RTOL = 0.05


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _load(args) -> tuple[SystemParams, Scenario]:
    params = load_params(args.params)
    scenario = load_scenario(args.scenario, params)
    if args.seed is not None:
        scenario = replace(scenario, config=scenario.config.replace(seed=args.seed))
    return params, scenario


def steady_state(ts: TimeSeries) -> tuple[float, float, bool]:
    """Mean and std of the beat frequency over the last quarter of the run."""
    tail = ts.beat_freq[3 * len(ts) // 4:]
    tail = tail[np.isfinite(tail)]
    if tail.size == 0:
        return float("nan"), float("nan"), False
    mean, std = float(np.mean(tail)), float(np.std(tail))
    return mean, std, bool(mean > 0 and std / mean < STEADY_RTOL)


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def _beat_hz(kv):
    return 2.0 * np.asarray(kv) / (2.0 * np.pi)


# ---------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    params, scenario = _load(args)
    ts = run_scenario(scenario.config, params)
    _emit(ts.to_csv(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- analytic


def cmd_analytic(args) -> int:
    p = load_params(args.params)
    if args.t_end <= 0 or args.points < 2:
        raise ConfigError("--t-end must be positive and --points >= 2")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.steady:
        sv = analytic.steady_velocity(p, args.participation)
        w.writerow(["kv_exact", "kv_asymptotic", "relative_deviation", "beat_exact_hz", "beat_asymptotic_hz"])
        w.writerow([repr(v) for v in (sv.exact, sv.asymptotic, sv.relative_deviation,
                                      float(_beat_hz(sv.exact)), float(_beat_hz(sv.asymptotic)))])
    else:
        t = np.linspace(0.0, args.t_end, args.points)
        chirp = analytic.cubic_chirp(t, p, args.participation)
        grid = np.concatenate([[0.0], np.geomspace(args.t_end * 1e-9, args.t_end, 4000)])
        mf = np.interp(t, grid, analytic.integrate_meanfield(grid, p, args.participation))
        w.writerow(["t", "kv_cubic", "kv_meanfield", "beat_cubic_hz", "beat_meanfield_hz"])
        for row in zip(t, chirp, mf, _beat_hz(chirp), _beat_hz(mf)):
            w.writerow([repr(float(v)) for v in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- sweep


def _sweep_point(job):
    name, value, params, cfg, out_dir = job
    p = params.replace(**{name: value})
    # a swept friction also replaces the molasses switch-on value
    events = tuple(replace(e, value=value) if e.name == f"set_{name}" else e for e in cfg.events)
    cfg = cfg.replace(events=events)
    try:
        ts = run_scenario(cfg, p)
    except IntegrationError as exc:
        return value, "blowup", str(exc), float("nan"), float("nan"), None
    write_atomic(Path(out_dir) / f"{name}_{value:.6g}.csv", ts.to_csv())
    mean, std, converged = steady_state(ts)
    try:
        sv = analytic.steady_velocity(ts.params)
        exact, asym = float(_beat_hz(sv.exact)), float(_beat_hz(sv.asymptotic))
    except ValueError:
        exact = asym = float("nan")
    status = "converged" if converged else "unconverged"
    return value, status, "", mean, std, (exact, asym)


def run_sweep(spec, params: SystemParams, cfg, out_dir, workers: int = 1):
    """Run every sweep point; returns rows ``(value, status, note, f, std, predictions)``."""
    jobs = [(spec.parameter, v, params, cfg, out_dir) for v in spec.values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def cmd_sweep(args) -> int:
    spec = load_sweep(args.sweep)
    params = load_params(spec.params_path)
    scenario = load_scenario(spec.scenario_path, params)
    cfg = scenario.config if args.seed is None else scenario.config.replace(seed=args.seed)
    out_dir = Path(args.out) if args.out else spec.output
    workers = max(1, int(os.environ.get("CARL_SIM_THREADS", "1")))
    rows = run_sweep(spec, params, cfg, out_dir, workers)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([spec.parameter, "status", "steady_beat_hz", "steady_beat_std_hz",
                "exact_root_beat_hz", "asymptotic_beat_hz"])
    for value, status, note, mean, std, pred in rows:
        exact, asym = pred if pred else (float("nan"), float("nan"))
        w.writerow([repr(value), status, repr(mean), repr(std), repr(exact), repr(asym)])
    write_atomic(out_dir / "summary.csv", buf.getvalue())
    sys.stdout.write(buf.getvalue())
    good = [(r[0], r[3]) for r in rows if r[1] == "converged"]
    slope = loglog_slope(*zip(*good)) if len(good) >= 2 else float("nan")
    print(f"# log-log slope of steady beat frequency vs {spec.parameter}: {slope:.4f}")
    for value, status, note, *_ in rows:
        if status != "converged":
            print(f"# point {value!r}: {status} {note}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- compare


def _validate_protocol(scenario: Scenario, params: SystemParams) -> SystemParams:
    """Parameters after all events, checked against the protocol's assumptions."""
    cfg = scenario.config
    final = params
    for e in cfg.events:
        final = final.replace(**{e.name[len("set_"):]: e.value})
    if scenario.protocol is None:
        raise ConfigError("scenario has no 'protocol' key; compare needs switch_off or molasses")
    if final.eta_minus != 0:
        raise ConfigError("compare protocols need eta_minus = 0 after the events")
    if scenario.protocol == "switch_off":
        if final.gamma_fric != 0:
            raise ConfigError("switch_off protocol is frictionless but gamma_fric > 0")
        if cfg.initial_distribution != "bunched_thermal":
            raise ConfigError("switch_off protocol needs initial_distribution = bunched_thermal")
    elif final.gamma_fric <= 0:
        raise ConfigError("molasses protocol needs gamma_fric > 0 (params or events)")
    return final


def compare(scenario: Scenario, params: SystemParams):
    """Run the simulation and its mean-field oracle.

    Returns ``(columns, rows, passed, summary)``.
    """
    final = _validate_protocol(scenario, params)
    ts = run_scenario(scenario.config, params)
    if scenario.protocol == "switch_off":
        tol = 0.5 if scenario.tolerance is None else scenario.tolerance
        oracle = _beat_hz(analytic.cubic_chirp(ts.t, final, scenario.participation))
        sim = ts.beat_freq
        alpha_plus = abs(stationary_pump(params))
        # probe strong enough for the beat to clear the 1 % contrast floor
        visible = np.abs(ts.alpha_minus) > 0.0025 * alpha_plus
        mask = np.isfinite(sim) & visible & (oracle > 0)
        dev = np.full(len(ts), np.nan)
        dev[mask] = sim[mask] / oracle[mask] - 1.0
        score = float(np.median(np.abs(dev[mask]))) if mask.any() else float("inf")
        columns = ("t", "sim_beat_hz", "oracle_beat_hz", "rel_dev")
        rows = zip(ts.t, sim, oracle, dev)
        summary = f"switch_off: median |rel dev| {score:.4g} (tolerance {tol:g})"
    else:
        tol = 0.01 if scenario.tolerance is None else scenario.tolerance
        kv_exact = analytic.steady_velocity(final, scenario.participation).exact
        sim = ts.kv_cm
        dev = sim / kv_exact - 1.0
        score = float(abs(np.mean(sim[3 * len(ts) // 4:]) / kv_exact - 1.0))
        columns = ("t", "sim_kv", "oracle_kv", "rel_dev")
        rows = zip(ts.t, sim, np.full(len(ts), kv_exact), dev)
        summary = f"molasses: last-quarter |rel dev| {score:.4g} (tolerance {tol:g})"
    return columns, list(rows), score <= tol, summary


def cmd_compare(args) -> int:
    params, scenario = _load(args)
    columns, rows, passed, summary = compare(scenario, params)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    _emit(buf.getvalue(), args.out)
    print(("PASS " if passed else "FAIL ") + summary, file=sys.stderr)
    return EXIT_OK if passed else EXIT_NUMERICAL


# ---------------------------------------------------------------- analyze


def read_series_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header[:len(CSV_COLUMNS)]) != CSV_COLUMNS:
            raise ConfigError(f"{path}: not a simulation CSV (header {header})")
        data = np.array([[float(v) for v in row] for row in reader])
    return header, data


def cmd_analyze(args) -> int:
    p = load_params(args.params)
    header, data = read_series_csv(args.input)
    t = data[:, 0]
    alpha = data[:, 1] + 1j * data[:, 2]
    floor = observables.contrast_floor(stationary_pump(p), p)
    slope = observables.beat_frequency_phase_slope(t, alpha, args.window)
    centres, zc = observables.beat_frequency_zero_crossing(t, data[:, 3], args.window, floor)
    m = int(round(args.window / np.mean(np.diff(t))))
    zc_col = np.full(t.size, np.nan)
    for j, f in enumerate(zc):
        zc_col[j * m:(j + 1) * m] = f
    drift = observables.drift_frequency(data[:, 7], p)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header) + ["beat_freq_phase_hz", "beat_freq_zc_hz", "beat_freq_drift_hz"])
    for row, a, b, c in zip(data, slope, zc_col, drift):
        w.writerow([repr(float(v)) for v in row] + [repr(float(a)), repr(float(b)), repr(float(c))])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carl-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        sp.add_argument("--params", required=True)
        if scenario:
            sp.add_argument("--scenario", required=True)
        sp.add_argument("--out")
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("simulate", help="integrate a scenario and write the observables CSV")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("analytic", help="mean-field chirp table or steady-state values")
    common(sp, scenario=False)
    sp.add_argument("--t-end", type=float, default=2e-3)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--participation", type=float, default=1.0)
    sp.add_argument("--steady", action="store_true")
    sp.set_defaults(func=cmd_analytic)

    sp = sub.add_parser("sweep", help="steady states over a parameter list")
    sp.add_argument("sweep")
    sp.add_argument("--out")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("compare", help="simulation against its mean-field oracle")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("analyze", help="append beat-frequency estimator columns to a simulation CSV")
    sp.add_argument("input")
    sp.add_argument("--params", required=True)
    sp.add_argument("--out")
    sp.add_argument("--window", type=float, default=observables.DEFAULT_WINDOW)
    sp.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
