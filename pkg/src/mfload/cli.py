"""Command-line surface: generate, analyze, simulate, sweep.

Exit codes: 0 on success, 1 for configuration or validation problems
(bad flags, malformed config, invalid inputs), 2 for runtime numerical
failures (calibration that cannot reach its targets, degenerate series).

All outputs are UTF-8 CSV with \\n line endings and a header row; a run
writes its provenance (config digest, measured traffic properties,
timestamps) to manifest.json next to the CSVs. Identical config + seed
gives byte-identical CSVs; only the manifest timestamps differ.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import fractal, metrics, traffic
from .config import config_digest, parse_config, parse_sweep_grid
from .errors import ConfigError, EstimationError
from .simulation import CalibrationTarget, ScenarioConfig, resolve_traffic, run_scenario

__all__ = ["main"]


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; our discipline wants 1."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="mfload", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic traffic series CSV")
    gen.add_argument("--hurst", type=float, required=True, help="target Hurst exponent")
    gen.add_argument(
        "--delta-h",
        type=float,
        default=0.0,
        help="target h(q) width; 0 selects plain fGn, larger values calibrate a composite",
    )
    gen.add_argument("--length", type=int, default=16384, help="series length in ticks")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--out", default="out", help="output directory")

    ana = sub.add_parser("analyze", help="estimate H, h(q) and delta_h from a series CSV")
    ana.add_argument("series", help="path to a tick,value CSV")
    ana.add_argument("--q-min", type=float, default=None)
    ana.add_argument("--q-max", type=float, default=None)
    ana.add_argument("--q-steps", type=int, default=None)
    ana.add_argument("--out", default="out")

    simp = sub.add_parser("simulate", help="run one scenario from a config file")
    simp.add_argument("--config", required=True)
    simp.add_argument("--seed", type=int, default=None, help="override the config seed")
    simp.add_argument("--out", default="out")

    swp = sub.add_parser("sweep", help="run the configured (H, delta_h) grid")
    swp.add_argument("--config", required=True)
    swp.add_argument("--seed", type=int, default=None, help="override the config seed")
    swp.add_argument("--out", default="out")
    return parser


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(path, name, digest, outputs, measured, started, ended) -> None:
    manifest = {
        "scenario": name,
        "config_digest": digest,
        "outputs": sorted(outputs),
        "measured": {"hurst": measured[0], "delta_h": measured[1]},
        "timestamps": {"start": started, "end": ended},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _q_grid(args) -> tuple[float, ...]:
    flags = (args.q_min, args.q_max, args.q_steps)
    if all(v is None for v in flags):
        return fractal.DEFAULT_Q_GRID
    q_min = args.q_min if args.q_min is not None else -5.0
    q_max = args.q_max if args.q_max is not None else 5.0
    steps = args.q_steps if args.q_steps is not None else 9
    if steps < 2:
        raise ConfigError("--q-steps must be at least 2")
    if q_min >= q_max:
        raise ConfigError("--q-min must be below --q-max")
    grid = set(np.linspace(q_min, q_max, steps).tolist())
    grid.add(2.0)  # h(2) anchors every spectrum
    return tuple(sorted(grid))


def cmd_generate(args) -> int:
    if args.length < 64:
        raise ConfigError("--length must be at least 64")
    _ensure_dir(args.out)
    if args.delta_h <= 0.0:
        series = traffic.generate_fgn(args.hurst, args.length, args.seed)
    else:
        meta = traffic.calibrate(args.hurst, args.delta_h)
        series = traffic.generate_from_meta(meta, args.length, seed=args.seed)
    path = os.path.join(args.out, "series.csv")
    traffic.write_series_csv(path, series.values[: args.length])
    print(f"wrote {path} ({args.length} ticks)")
    return 0


def cmd_analyze(args) -> int:
    values = traffic.read_series_csv(args.series)
    spectrum = fractal.mfdfa(values, _q_grid(args))
    _ensure_dir(args.out)
    path = os.path.join(args.out, "spectrum.csv")
    fractal.write_spectrum_csv(path, spectrum)
    print(f"# H={spectrum.h_at(2.0):.12g} dH={spectrum.delta_h:.12g}")
    return 0


def _final_quarter_mean(reports) -> float:
    tail = reports[3 * len(reports) // 4 :]
    return float(np.mean([r.isl_tot for r in tail])) if tail else 0.0


def _final_half_cv(reports) -> float:
    tail = [r.isl_tot for r in reports[len(reports) // 2 :]]
    if not tail:
        return 0.0
    mean = float(np.mean(tail))
    if mean == 0.0:
        return 0.0
    return float(np.std(tail) / mean)


def _run_one(config: ScenarioConfig, out_dir: str) -> dict:
    """Simulate one scenario into `out_dir`; returns its summary numbers."""
    _ensure_dir(out_dir)
    started = _now()

    meta, series = resolve_traffic(config)
    # hand the realized meta back so run_scenario skips a second calibration
    run_config = dataclasses.replace(config, traffic=meta)
    used = series.values[: config.horizon]
    spectrum = fractal.mfdfa(used)
    measured = (spectrum.h_at(2.0), spectrum.delta_h)

    reports = run_scenario(run_config)

    series_path = os.path.join(out_dir, "series.csv")
    report_path = os.path.join(out_dir, "report.csv")
    sil_path = os.path.join(out_dir, "sil.csv")
    traffic.write_series_csv(series_path, used)
    summary = (
        f"scenario={config.name} H={measured[0]:.12g} dH={measured[1]:.12g} "
        f"mean_isl_tot={_final_quarter_mean(reports):.12g}"
    )
    metrics.write_report_csv(report_path, reports, config.window, summary=summary)
    metrics.write_sil_csv(sil_path, reports, config.window, [s.id for s in config.cluster])

    _write_manifest(
        os.path.join(out_dir, "manifest.json"),
        config.name,
        config_digest(config),
        [os.path.basename(p) for p in (series_path, report_path, sil_path)],
        measured,
        started,
        _now(),
    )
    return {
        "name": config.name,
        "measured": measured,
        "mean_isl_tot_final_quarter": _final_quarter_mean(reports),
        "cv_isl_tot_final_half": _final_half_cv(reports),
    }


def cmd_simulate(args) -> int:
    config = parse_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    result = _run_one(config, args.out)
    print(
        f"scenario={result['name']} H={result['measured'][0]:.4g} "
        f"dH={result['measured'][1]:.4g} "
        f"mean_isl_tot={result['mean_isl_tot_final_quarter']:.4g}"
    )
    return 0


def cmd_sweep(args) -> int:
    base = parse_config(args.config)
    if args.seed is not None:
        base = dataclasses.replace(base, seed=args.seed)
    cells, budget = parse_sweep_grid(args.config)
    _ensure_dir(args.out)

    rows = []
    for hurst, delta_h in cells:
        name = f"h{hurst:g}_dh{delta_h:g}"
        cell_config = dataclasses.replace(
            base,
            name=name,
            traffic=CalibrationTarget(hurst=hurst, delta_h=delta_h, budget=budget),
        )
        result = _run_one(cell_config, os.path.join(args.out, name))
        rows.append(
            (
                name,
                hurst,
                delta_h,
                result["measured"][0],
                result["measured"][1],
                result["mean_isl_tot_final_quarter"],
                result["cv_isl_tot_final_half"],
            )
        )

    rows.sort(key=lambda r: r[0])
    lines = [
        "scenario,H_target,dH_target,H_measured,dH_measured,"
        "mean_isl_tot_final_quarter,cv_isl_tot_final_half"
    ]
    for row in rows:
        lines.append(
            f"{row[0]},{row[1]:.12g},{row[2]:.12g},{row[3]:.12g},"
            f"{row[4]:.12g},{row[5]:.12g},{row[6]:.12g}"
        )
    summary_path = os.path.join(args.out, "summary.csv")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {summary_path} ({len(rows)} scenarios)")
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
