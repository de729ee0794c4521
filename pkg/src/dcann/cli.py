"""``dcann`` command line: generate | run | plot | report.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure
(failed fits, failed hard checks, unreadable inputs).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import config as cfgmod
from . import harness, kernels, plots, report, synthgen

OUTPUT_ENV = "DCANN_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _default_out() -> Path:
    return Path(os.environ.get(OUTPUT_ENV) or "dcann-out")


def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML configuration file")
    p.add_argument("--profile", choices=sorted(cfgmod.PROFILES), help="preset applied before the config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one setting, e.g. sweep.repetitions=5 (repeatable)")
    p.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dcann", description="Logit vs. neural network sweeps on synthetic binary choice data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write one synthetic dataset as CSV plus a JSON sidecar")
    _config_flags(g)
    g.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_ENV} or ./dcann-out)")
    g.add_argument("--discrete", action="store_true", help="also write the discretized copy")

    r = sub.add_parser("run", help="run the sweep; writes results.csv, aggregate.csv, summary.json")
    _config_flags(r)
    r.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_ENV} or ./dcann-out)")
    r.add_argument("--jobs", type=_positive, default=1, help="worker processes (default 1)")
    r.add_argument("--keep-going", action="store_true", help="exit 0 even if some fits failed")
    r.add_argument("--timing", action="store_true",
                   help="store measured fit times in results.csv (makes the file run-dependent)")
    r.add_argument("--quiet", action="store_true", help="no progress on stderr")

    pl = sub.add_parser("plot", help="render SVG charts from an aggregate CSV")
    pl.add_argument("aggregate", type=Path, nargs="?", help="aggregate CSV (default <out>/aggregate.csv)")
    pl.add_argument("--out", type=Path, help="output directory; charts go to <out>/plots")

    rp = sub.add_parser("report", help="evaluate the acceptance checks on a results CSV")
    rp.add_argument("results", type=Path, nargs="?", help="results CSV (default <out>/results.csv)")
    rp.add_argument("--out", type=Path, help="directory holding results.csv when no path is given")
    rp.add_argument("--full-v", type=_positive, default=100, help="variable count treated as 'all variables'")
    rp.add_argument("--skip-selfcheck", action="store_true", help="do not run the property battery")
    return parser


def _load(args) -> dict:
    return cfgmod.load_tree(args.config, args.profile, args.overrides, args.seed)


def cmd_generate(args) -> int:
    gen = cfgmod.generator_config(_load(args))
    out = args.out or _default_out()
    out.mkdir(parents=True, exist_ok=True)
    data = synthgen.generate(gen)
    tag = f"p{gen.p_true:.2f}_seed{gen.seed}"
    paths = list(synthgen.write_csv(data, out / f"dataset_{tag}.csv"))
    if args.discrete:
        paths += synthgen.write_csv(synthgen.discretize(data), out / f"dataset_{tag}_discrete.csv")
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_run(args) -> int:
    config = cfgmod.build(_load(args))
    out = args.out or _default_out()
    out.mkdir(parents=True, exist_ok=True)

    def progress(done, total):
        print(f"\r{done}/{total} cells", end="" if done < total else "\n", file=sys.stderr, flush=True)

    result = harness.run(config, jobs=args.jobs, progress=None if args.quiet else progress)
    harness.write_results_csv(result.records, out / "results.csv", include_timing=args.timing)
    harness.write_aggregate_csv(harness.aggregate(result.records), out / "aggregate.csv")
    harness.write_summary_json(result.summary, out / "summary.json")
    s = result.summary
    print(f"{s['n_records']} records, {s['n_failed']} failed, {s['runtime_seconds']:.1f}s "
          f"({kernels.BACKEND} kernels) -> {out}")
    if s["n_failed"]:
        for method, n in sorted(s["failures_by_method"].items()):
            print(f"  {method}: {n} failed fits", file=sys.stderr)
        if not args.keep_going:
            return EXIT_RUNTIME
    return EXIT_OK


def cmd_plot(args) -> int:
    base = args.out or _default_out()
    src = args.aggregate or base / "aggregate.csv"
    rows = harness.read_aggregate_csv(src)
    if not rows:
        raise ValueError(f"{src}: no aggregate rows")
    for p in plots.plot_aggregate(rows, base / "plots"):
        print(p)
    return EXIT_OK


def cmd_report(args) -> int:
    src = args.results or (args.out or _default_out()) / "results.csv"
    records = harness.read_results_csv(src)
    if not records:
        raise ValueError(f"{src}: no result rows")
    results = report.evaluate(records, full_v=args.full_v, run_selfcheck=not args.skip_selfcheck)
    sys.stdout.write(report.render(results))
    return EXIT_RUNTIME if report.hard_failures(results) else EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "plot": cmd_plot, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except cfgmod.ConfigError as exc:
        print(f"dcann: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"dcann: {exc.filename or exc}: no such file", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"dcann: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
