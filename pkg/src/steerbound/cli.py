"""Command-line interface: ``steerbound <command> [options]``.

Exit status is 0 on success, 1 when ``verify`` finds a mismatch and 2 on
usage errors (bad flags, unsupported ``n``, malformed grid or scenario).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .checks import verify
from .export import (
    Table,
    comparison_table,
    curves_table,
    frontiers_table,
    naive_table,
    points_table,
)
from .geometry import GeometryError, build_measurement_set
from .loss_bounds import (
    CRITERIA,
    BoundError,
    criterion_comparison,
    default_grid,
    linear_bound_perfect,
    parse_grid,
    post_selected_curve,
    variance_bound_perfect,
)
from .simulator import Scenario, SimulationError, run
from .strategies import optimal_ensembles

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2

# closed forms recognised when printing perfect-efficiency bounds
_EXACT = {
    1.0 / math.sqrt(2.0): "1/sqrt(2)",
    1.0 / math.sqrt(3.0): "1/sqrt(3)",
    0.5: "1/2",
    1.0 / 3.0: "1/3",
}


class UsageError(Exception):
    pass


def _n_list(values: list[str]) -> list[int]:
    out = []
    for v in values:
        for part in v.split(","):
            if part.strip():
                try:
                    out.append(int(part))
                except ValueError:
                    raise UsageError(f"--n expects integers, got {part!r}") from None
    if not out:
        raise UsageError("--n needs at least one value")
    return out


def _criteria(arg: str | None) -> tuple[str, ...]:
    return CRITERIA if arg is None else (arg,)


def _grid(arg: str | None) -> list[float]:
    return default_grid() if arg is None else parse_grid(arg)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, newline="\n")


def _exact_label(value: float) -> str:
    for ref, label in _EXACT.items():
        if abs(value - ref) <= 1e-12:
            return label
    return ""


def cmd_bounds(args) -> int:
    table = Table(["n", "criterion", "value", "exact"])
    for n in _n_list(args.n):
        ms = build_measurement_set(n)
        for crit in _criteria(args.criterion):
            value = linear_bound_perfect(ms) if crit == "linear" else variance_bound_perfect(ms)
            table.rows.append([n, crit, value, _exact_label(value)])
    _emit(table.render(args.format), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = _grid(args.grid)
    sets = [build_measurement_set(n) for n in _n_list(args.n)]
    curves = [post_selected_curve(ms, crit, grid) for ms in sets for crit in _criteria(args.criterion)]
    ext = args.format
    if args.out is None:
        sys.stdout.write(curves_table(curves).render(ext))
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _emit(curves_table(curves).render(ext), str(out / f"curves.{ext}"))
    _emit(points_table(curves).render(ext), str(out / f"points.{ext}"))
    comparison = {ms.n: criterion_comparison(ms, grid) for ms in sets}
    _emit(comparison_table(comparison).render(ext), str(out / f"comparison.{ext}"))
    return EXIT_OK


def cmd_naive_sweep(args) -> int:
    grid = _grid(args.grid)
    sets = [build_measurement_set(n) for n in _n_list(args.n)]
    curves = naive_table(sets, grid)
    frontiers = frontiers_table(sets)
    if args.format == "json":
        payload = {"curves": curves.to_records(), "frontiers": frontiers.to_records()}
        text = json.dumps(payload, indent=2) + "\n"
        _emit(text, args.out)
        return EXIT_OK
    if args.out is None:
        sys.stdout.write(curves.to_csv())
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _emit(curves.to_csv(), str(out / "naive.csv"))
    _emit(frontiers.to_csv(), str(out / "frontiers.csv"))
    return EXIT_OK


def cmd_strategies(args) -> int:
    ns = _n_list(args.n)
    if len(ns) != 1:
        raise UsageError("strategies takes a single --n")
    ms = build_measurement_set(ns[0])
    if args.criterion is None:
        raise UsageError("strategies needs --criterion")
    m = ms.n if args.m is None else args.m
    if not 1 <= m <= ms.n:
        raise UsageError(f"--m must lie in 1..{ms.n}")
    _emit(optimal_ensembles(ms, args.criterion, m).to_json() + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        payload = json.loads(Path(args.scenario).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read scenario: {exc}") from None
    if args.trials is not None:
        payload["trials"] = args.trials
    if args.seed is not None:
        payload["seed"] = args.seed
    try:
        scenario = Scenario.from_dict(payload)
    except KeyError as exc:
        raise UsageError(f"scenario is missing field {exc}") from None
    report = run(scenario, transcript_path=args.transcript, allow_incomplete=True)
    if not math.isfinite(report.s_n_estimate):
        print("warning: too few trials to score every setting; estimates are NaN", file=sys.stderr)
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify(args.grid_points)
    lines = [c.line() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_MISMATCH if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steerbound", description="Loss-tolerant EPR-steering bounds for Platonic-solid measurements.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n=True, criterion=True, grid=False, fmt=True):
        if n:
            p.add_argument("--n", nargs="+", required=True, help="number of settings (2, 3, 4, 6, 10); space or comma separated")
        if criterion:
            p.add_argument("--criterion", choices=CRITERIA, help="default: both")
        if grid:
            p.add_argument("--grid", help="efficiency grid start:stop:step (default 0.01:1:0.01)")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output file (or directory for sweep)")

    p = sub.add_parser("bounds", help="perfect-efficiency bounds k_n and g_n")
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="post-selected bound curves, deterministic points and criterion comparison")
    common(p, grid=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("naive-sweep", help="critical purity per loss-handling regime")
    common(p, criterion=False, grid=True)
    p.set_defaults(func=cmd_naive_sweep)

    p = sub.add_parser("strategies", help="catalog of optimal cheating ensembles as JSON")
    common(p, fmt=False)
    p.add_argument("--m", type=int, help="non-null settings (default n)")
    p.set_defaults(func=cmd_strategies)

    p = sub.add_parser("simulate", help="Monte Carlo run of a scenario JSON file")
    p.add_argument("scenario", help="scenario JSON path")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--transcript", help="write a per-trial CSV transcript here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="cross-check bounds against the brute-force oracle")
    p.add_argument("--grid-points", type=int, default=10**6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GeometryError, BoundError, SimulationError) as exc:
        print(f"steerbound {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
