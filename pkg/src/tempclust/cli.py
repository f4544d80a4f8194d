"""Command-line front end.

    tempclust gen CS 5 --seed 42 --out cs.csv
    tempclust cluster cs.csv --mode eco --out out/
    tempclust percolate cs.csv --out out/
    tempclust bench cs.csv rs.csv --algos tca,kmeans,em,conventional --out out/
    tempclust sweep cs.csv --steps 20 --out out/

Exit codes: 0 success (warnings included), 2 usage error, 3 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import kernel
from .core import Mode, bin_events, check_period, dump_event_log, read_event_log
from .datagen import builtin_profile, gen_log, read_profile
from .errors import EmptySystemError, InvalidPeriodError, TCAError
from .plots import sweep_svg, timeline_svg
from .sim import (
    CVResult,
    PowerModel,
    algorithm_by_name,
    cross_validate,
    dstar_sweep,
    dump_reports_csv,
    dump_reports_json,
    dump_sweep_csv,
    mode_table,
    summary_table,
    tca_algorithm,
)
from .tca import ThresholdParams, cluster_fixed, dump_clusters_csv, dump_trace_csv, percolation_sweep, select_threshold

logger = logging.getLogger("tempclust")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3
ALGOS = ("tca", "kmeans", "em", "conventional")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    period: int = 10
    mode: Mode = Mode.COMFORT
    engine: str = "reference"
    algos: tuple[str, ...] = ALGOS
    seed: int | None = None
    out: str | None = None
    power_rate: float = PowerModel().rate
    fmt: str = "csv"

    def __post_init__(self) -> None:
        try:
            check_period(self.period)
        except InvalidPeriodError as exc:
            raise UsageError(str(exc)) from None
        if self.command == "gen" and self.seed is None:
            raise UsageError("--seed is required for synthetic generation")

    @property
    def power(self) -> PowerModel:
        return PowerModel(self.power_rate)


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dataset_name(path: str) -> str:
    return Path(path).stem


def cmd_gen(cfg: RunConfig, profile: str, days: int) -> int:
    try:
        prof = builtin_profile(profile)
    except KeyError:
        if not os.path.exists(profile):
            raise UsageError(f"unknown profile {profile!r} (use CS, RS or a profile file)") from None
        prof = read_profile(profile)
    log = gen_log(prof, days, cfg.seed)
    text = dump_event_log(log)
    if cfg.out:
        _write(Path(cfg.out), text)
    else:
        sys.stdout.write(text)
    stream = sys.stderr if not cfg.out else sys.stdout
    for d, day in enumerate(log.days):
        print(f"day {d}: {len(day)} events", file=stream)
    return EXIT_OK


def cmd_cluster(cfg: RunConfig) -> int:
    log = read_event_log(cfg.inputs[0])
    out = _outdir(cfg)
    proto = bin_events(log, cfg.period)
    d_star = select_threshold(cfg.mode, proto)
    try:
        trace = percolation_sweep(proto, d_star)
    except EmptySystemError:
        trace = None
    if trace is None:
        clusters = []
    elif cfg.engine == "kernel":
        if cfg.period != kernel.PERIOD:
            raise UsageError(f"--engine kernel requires --period {kernel.PERIOD}")
        state = kernel.state_from_days(log.days)
        flags = kernel.kernel_tca(state, cfg.mode)
        if flags & ~kernel.EMPTY:
            logger.warning("kernel flags: %s", ", ".join(kernel.describe_flags(flags)))
        clusters = kernel.kernel_clusters(state)
    else:
        clusters = cluster_fixed(proto, ThresholdParams(trace.selected_ell, d_star))
    if not clusters:
        logger.warning("no populated bins at D*=%.4g: compressor never scheduled", d_star)

    if cfg.fmt == "json":
        payload = [dict(zip(("start_minute", "end_minute"), c.minutes(cfg.period))) for c in clusters]
        _write(out / "clusters.json", json.dumps(payload, indent=2) + "\n")
        steps = [] if trace is None else [
            {"ell": s.ell, "largest": s.largest, "second_largest": s.second_largest, "cluster_count": s.cluster_count}
            for s in trace.steps
        ]
        _write(out / "trace.json", json.dumps(steps, indent=2) + "\n")
    else:
        _write(out / "clusters.csv", dump_clusters_csv(clusters, cfg.period))
        _write(out / "trace.csv", "ell,largest,second_largest,cluster_count\n" if trace is None else dump_trace_csv(trace))
    _write(out / "timeline.svg", timeline_svg(proto, clusters, d_star))

    print(f"mode={cfg.mode.value} D*={d_star:.4f} engine={cfg.engine}")
    if trace is not None:
        print(f"critical_ell={trace.critical_ell} selected_ell={trace.selected_ell}")
    for c in clusters:
        a, b = c.minutes(cfg.period)
        print(f"  {a // 60:02d}:{a % 60:02d}-{b // 60:02d}:{b % 60:02d}")
    return EXIT_OK


def cmd_percolate(cfg: RunConfig, d_star: float | None) -> int:
    log = read_event_log(cfg.inputs[0])
    proto = bin_events(log, cfg.period)
    if d_star is None:
        d_star = select_threshold(cfg.mode, proto)
    try:
        trace = percolation_sweep(proto, d_star)
    except EmptySystemError:
        logger.warning("no populated bins at D*=%.4g", d_star)
        return EXIT_OK
    text = dump_trace_csv(trace)
    if cfg.out:
        _write(_outdir(cfg) / "trace.csv", text)
    else:
        sys.stdout.write(text)
    print(f"D*={d_star:.4f} critical_ell={trace.critical_ell} selected_ell={trace.selected_ell} omega={trace.omega}",
          file=sys.stderr if not cfg.out else sys.stdout)
    return EXIT_OK


def cmd_bench(cfg: RunConfig, with_sweep: bool, steps: int) -> int:
    out = _outdir(cfg)
    logs = {_dataset_name(p): read_event_log(p) for p in cfg.inputs}
    results: dict[tuple[str, str], CVResult] = {}
    reports = []
    for name, log in logs.items():
        for algo in cfg.algos:
            alg = algorithm_by_name(algo, cfg.period, cfg.mode, cfg.engine)
            cv = cross_validate(log, alg, cfg.power, dataset=name)
            results[(alg.name, name)] = cv
            reports.extend(cv.reports)
    modes: dict[tuple[Mode, str], CVResult] = {}
    if "tca" in cfg.algos:
        for name, log in logs.items():
            for m in Mode:
                alg = tca_algorithm(m, cfg.period, cfg.engine)
                modes[(m, name)] = cross_validate(log, alg, cfg.power, dataset=name)

    if cfg.fmt == "json":
        _write(out / "reports.json", json.dumps(dump_reports_json(reports), indent=2) + "\n")
    else:
        _write(out / "reports.csv", dump_reports_csv(reports))
    unit = cfg.power.unit_label
    summary = "Memory, mean energy per day and mean error\n\n" + summary_table(results, unit)
    if modes:
        summary += "\nTCA modes: mean energy per day and mean error\n\n" + mode_table(modes, unit)
    _write(out / "summary.txt", summary)
    sys.stdout.write(summary)

    if with_sweep:
        for name, log in logs.items():
            sweep = dstar_sweep(log, cfg.period, cfg.power, steps)
            _write(out / f"sweep_{name}.csv", dump_sweep_csv(sweep))
            _write(out / f"sweep_{name}.svg", sweep_svg(sweep, unit))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, steps: int, d_max: float | None) -> int:
    out = _outdir(cfg)
    log = read_event_log(cfg.inputs[0])
    sweep = dstar_sweep(log, cfg.period, cfg.power, steps, d_max)
    _write(out / "sweep.csv", dump_sweep_csv(sweep))
    _write(out / "sweep.svg", sweep_svg(sweep, cfg.power.unit_label))
    print(f"mu={sweep.mu:.4f} sigma={sweep.sigma:.4f}")
    for m, d in sweep.modes.items():
        print(f"  {m.value}: D*={d:.4f}")
    return EXIT_OK


def _parse_algos(text: str) -> tuple[str, ...]:
    names = tuple(a.strip().lower() for a in text.split(",") if a.strip())
    bad = [a for a in names if a not in ALGOS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s): {', '.join(bad) or '(none)'}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--period", type=int, default=10, help="minutes per bin (default: 10)")
    common.add_argument("--mode", choices=[m.value for m in Mode], default="comfort")
    common.add_argument("--engine", choices=("reference", "kernel"), default="reference")
    common.add_argument("--algos", type=_parse_algos, default=ALGOS, help="comma list of " + ",".join(ALGOS))
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--power-rate", type=float, default=PowerModel().rate, help="energy per compressor-on hour")
    common.add_argument("--out", default=None, help="output directory (gen: output file)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="tempclust", description="Temporal clustering of appliance usage logs.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a synthetic event log")
    g.add_argument("profile", help="CS, RS or a profile file")
    g.add_argument("days", type=int)

    c = sub.add_parser("cluster", parents=[common], help="cluster an event log")
    c.add_argument("log")

    pc = sub.add_parser("percolate", parents=[common], help="print the percolation trace")
    pc.add_argument("log")
    pc.add_argument("--d-star", type=float, default=None, help="override the mode threshold")

    b = sub.add_parser("bench", parents=[common], help="cross-validated benchmark")
    b.add_argument("logs", nargs="+")
    b.add_argument("--sweep", action="store_true", help="also write D* sweep curves")
    b.add_argument("--steps", type=int, default=20)

    s = sub.add_parser("sweep", parents=[common], help="density-threshold sweep")
    s.add_argument("log")
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--d-max", type=float, default=None, help="upper end of the sweep (default: mu)")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    inputs = {"cluster": [getattr(args, "log", None)], "percolate": [getattr(args, "log", None)],
              "sweep": [getattr(args, "log", None)], "bench": getattr(args, "logs", None)}.get(args.command, [])
    try:
        cfg = RunConfig(
            command=args.command,
            inputs=inputs,
            period=args.period,
            mode=Mode.parse(args.mode),
            engine=args.engine,
            algos=args.algos,
            seed=args.seed,
            out=args.out,
            power_rate=args.power_rate,
            fmt=args.fmt,
        )
        if args.command == "gen":
            return cmd_gen(cfg, args.profile, args.days)
        if args.command == "cluster":
            return cmd_cluster(cfg)
        if args.command == "percolate":
            return cmd_percolate(cfg, args.d_star)
        if args.command == "bench":
            return cmd_bench(cfg, args.sweep, args.steps)
        return cmd_sweep(cfg, args.steps, args.d_max)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tempclust: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TCAError, ValueError, OSError) as exc:
        print(f"tempclust: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
