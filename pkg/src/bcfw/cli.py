"""Command-line entry point ``bcfw``.

Subcommands::

    bcfw exp1 [flags]          box/spectraplex intersection
    bcfw exp2 [flags]          difference-of-convex quadratic
    bcfw solve CONFIG          run an experiment from a key=value file
    bcfw validate-schedule --strategy S --m M --k K --horizon H
    bcfw plot --in DIR --out DIR

Exit status is 0 on success, 2 for configuration errors and 1 for failures
during a run.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .blocks import ScheduleSpecError, parse_schedule, verify_coverage
from .experiments import ConfigError, ExperimentConfig, run_experiment
from .traces import emit_plots

# desk-scale defaults; the full experiments use --n 100..500 --iters 10000 --instances 20
DESK = {"n": 20, "iters": 2000, "instances": 3}
EXP_NAMES = {"exp1": "intersect", "exp2": "dcquad"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits on its own; route errors through cli_main so it can return 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=DESK["n"], help="problem side length")
    p.add_argument("--iters", type=int, default=DESK["iters"], help="iterations per run")
    p.add_argument("--instances", type=int, default=DESK["instances"], help="random instances per strategy")
    p.add_argument("--seed", type=int, default=0, help="base seed; instance k uses seed+k")
    p.add_argument("--strategy", action="append", default=None, help="schedule spec, repeatable")
    p.add_argument("--step", default="short", help="'short' or 'adaptive[:M0,eta,tau]'")
    p.add_argument("--m0", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--store-every", type=int, default=None)
    p.add_argument("--out", default="bcfw-out", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="parallel instances")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bcfw", description="Block-coordinate Frank-Wolfe experiments")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name, help_ in (("exp1", "box/spectraplex intersection"), ("exp2", "difference-of-convex quadratic")):
        _add_run_flags(sub.add_parser(name, help=help_))
    p = sub.add_parser("solve", help="run from a key=value config file")
    p.add_argument("config")
    p = sub.add_parser("validate-schedule", help="check K-coverage of a schedule")
    p.add_argument("--strategy", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("plot", help="render SVG plots from averaged traces")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    return parser


def _config_from_args(experiment: str, a: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        experiment=experiment,
        n=a.n,
        iterations=a.iters,
        instances=a.instances,
        base_seed=a.seed,
        strategies=a.strategy or (),
        step=a.step,
        m0=a.m0,
        eta=a.eta,
        tau=a.tau,
        trace_every=a.trace_every,
        store_every=a.store_every,
        out=a.out,
        workers=a.workers,
    )


_INT_KEYS = {"n", "iters", "instances", "seed", "trace-every", "store-every", "workers"}
_FLOAT_KEYS = {"m0", "eta", "tau"}
_STR_KEYS = {"experiment", "step", "out"}


def read_config_file(path) -> ExperimentConfig:
    """Parse a ``key=value`` file whose keys mirror the CLI flags.

    ``strategy`` may be repeated; ``experiment`` accepts ``exp1``/``exp2``
    or ``intersect``/``dcquad``. Relative ``out`` paths resolve against
    the current directory.
    """
    vals = dict(n=DESK["n"], iters=DESK["iters"], instances=DESK["instances"], seed=0, step="short", out="bcfw-out")
    vals["trace-every"] = 1
    strategies = []
    experiment = None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("_", "-")
        value = value.strip()
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        try:
            if key == "strategy":
                strategies.append(value)
            elif key == "experiment":
                experiment = EXP_NAMES.get(value, value)
            elif key in _INT_KEYS:
                vals[key] = int(value)
            elif key in _FLOAT_KEYS:
                vals[key] = float(value)
            elif key in _STR_KEYS:
                vals[key] = value
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    if experiment is None:
        raise ConfigError(f"{path}: missing 'experiment'")
    return ExperimentConfig(
        experiment=experiment,
        n=vals["n"],
        iterations=vals["iters"],
        instances=vals["instances"],
        base_seed=vals["seed"],
        strategies=strategies,
        step=vals["step"],
        m0=vals.get("m0"),
        eta=vals.get("eta"),
        tau=vals.get("tau"),
        trace_every=vals["trace-every"],
        store_every=vals.get("store-every"),
        out=vals["out"],
        workers=vals.get("workers", 1),
    )


def _run(cfg: ExperimentConfig) -> int:
    results = run_experiment(cfg)
    for strategy, sr in results.items():
        last = sr.average[-1]
        measure = "primal" if last["primal"] is not None else "dmin"
        val = last[measure]
        if val is None:
            val = next((r["dmin"] for r in reversed(sr.average) if r["dmin"] is not None), None)
        shown = "n/a" if val is None else f"{val:.3e}"
        print(f"{strategy:>14}  {measure}={shown}  -> {sr.paths['avg']}")
    return 0


def _validate_schedule(a) -> int:
    sched = parse_schedule(a.strategy, a.m, seed=a.seed)
    if a.k < 1 or a.horizon < a.k:
        raise ConfigError("need k >= 1 and horizon >= k")
    report = verify_coverage(sched.sequence(a.horizon), a.k, a.m)
    if report.ok:
        print(f"ok: {a.strategy} covers all {a.m} blocks in every window of {a.k} (horizon {a.horizon})")
        return 0
    print(f"violation: block {report.missing} missing from the window starting at t={report.first_violation}")
    return 1


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if a.cmd in EXP_NAMES:
            return _run(_config_from_args(EXP_NAMES[a.cmd], a))
        if a.cmd == "solve":
            return _run(read_config_file(a.config))
        if a.cmd == "validate-schedule":
            return _validate_schedule(a)
        if a.cmd == "plot":
            paths = sorted(Path(a.inp).glob("*_avg.csv"))
            if not paths:
                raise ConfigError(f"no *_avg.csv files in {a.inp}")
            for p in emit_plots(paths, a.out):
                print(p)
            return 0
    except (ConfigError, ScheduleSpecError) as exc:
        print(f"bcfw: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"bcfw: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 2


def main() -> None:
    sys.exit(cli_main())
