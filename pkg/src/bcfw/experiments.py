"""Experiment drivers: problem builders, multi-instance runs and averaged traces.

Two built-in experiments are available:

``intersect``
    Find a point in the intersection of the box ``[-1, 1/n]^{n x n}`` and
    the spectraplex by minimizing ``0.5 ||x^0 - x^1||^2``. The optimal value
    is 0, so primal gaps are exact.
``dcquad``
    Minimize the indefinite quadratic ``0.5 <X, X (A - B)>`` over ``n``
    row blocks in the unit ``l_inf`` ball and one ``n x n`` block in the
    unit nuclear-norm ball. Progress is measured by the smallest full
    Frank-Wolfe gap seen at stored iterates.

``custom`` runs any problem supplied as a factory ``seed -> Problem``.

Instance ``k`` uses seed ``base_seed + k``. The problem data is drawn from
``default_rng((seed, 0))``, the starting point from ``default_rng((seed, 1))``
and randomized schedules are seeded with ``seed`` itself.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .blocks import ScheduleSpecError, parse_schedule
from .core import BlockVector
from .lmo import Box, LinfBall, NuclearBall, ProductDomain, Spectraplex
from .objective import CollatedQuadraticDifference, QuadraticDistance, psd_project
from .solver import Adaptive, fw_gap, run_adaptive, run_short_step
from .traces import write_trace_csv

EXPERIMENTS = ("intersect", "dcquad", "custom")
RESAMPLE_CAP = 20


class ConfigError(ValueError):
    """Invalid experiment configuration (reported by the CLI with exit code 2)."""


# --------------------------------------------------------------------------
# configuration


def parse_step(spec: str, m0: float | None = None, eta: float | None = None, tau: float | None = None) -> Adaptive | None:
    """Turn ``short`` or ``adaptive[:M0,eta,tau]`` into ``None`` or an :class:`Adaptive` rule.

    Explicit ``m0``/``eta``/``tau`` override values given in the string.
    """
    kind, _, arg = spec.strip().lower().partition(":")
    if kind == "short":
        if arg:
            raise ConfigError(f"step 'short' takes no parameters, got {spec!r}")
        return None
    if kind != "adaptive":
        raise ConfigError(f"unknown step {spec!r}; use 'short' or 'adaptive:M0,eta,tau'")
    vals = [1.0, 0.9, 2.0]
    if arg:
        parts = arg.split(",")
        if len(parts) > 3:
            raise ConfigError(f"too many adaptive parameters in {spec!r}")
        try:
            for k, p in enumerate(parts):
                vals[k] = float(p)
        except ValueError:
            raise ConfigError(f"bad adaptive parameters in {spec!r}") from None
    for k, v in enumerate((m0, eta, tau)):
        if v is not None:
            vals[k] = float(v)
    try:
        return Adaptive(*vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class ExperimentConfig:
    """Settings for one experiment over several strategies and instances.

    ``strategies`` empty means the experiment's default set. ``store_every``
    ``None`` means every ``K`` iterations (the schedule's coverage window)
    for ``dcquad`` and no stored iterates otherwise.
    """

    experiment: str = "intersect"
    n: int = 20
    iterations: int = 10000
    instances: int = 20
    base_seed: int = 0
    strategies: Sequence[str] = ()
    step: str = "short"
    m0: float | None = None
    eta: float | None = None
    tau: float | None = None
    trace_every: int = 1
    store_every: int | None = None
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        self.strategies = tuple(self.strategies)
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        for name, lo in (("n", 2), ("iterations", 1), ("instances", 1), ("trace_every", 1), ("workers", 1)):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < lo:
                raise ConfigError(f"{name} must be an integer >= {lo}, got {v!r}")
        if self.base_seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.store_every is not None and self.store_every < 1:
            raise ConfigError("store_every must be positive")
        self.step_rule()

    def step_rule(self) -> Adaptive | None:
        return parse_step(self.step, self.m0, self.eta, self.tau)

    def seeds(self) -> list[int]:
        return [self.base_seed + k for k in range(self.instances)]


def default_strategies(experiment: str, n: int) -> list[str]:
    if experiment == "dcquad":
        pq = [(2, 20), (10, 10), (max(1, n // 2), 5), (n, 2)]
        out = ["full", "cyclic", "pcyclic"]
        for p, q in pq:
            s = f"pqlazy:{min(p, n)},{q}"
            if s not in out:
                out.append(s)
        return out
    return ["full", "cyclic", "pcyclic", "qlazy:5", "qlazy:10", "qlazy:20"]


def strategy_tag(spec: str) -> str:
    """File-name friendly form of a schedule spec (``pqlazy:3,5`` -> ``pqlazy3-5``)."""
    return re.sub(r"[^a-z0-9-]", "", spec.strip().lower().replace(",", "-"))


# --------------------------------------------------------------------------
# problems


class Problem(NamedTuple):
    """Everything a run needs besides the schedule.

    ``expensive`` names the block(s) lazy schedules postpone, ``f_star``
    the optimal value when known and ``H0`` an upper bound on
    ``f(x_0) - inf f`` when one is available. ``info`` holds scalars that
    go into trace metadata.
    """

    obj: object
    domain: ProductDomain
    x0: BlockVector
    expensive: int | tuple[int, ...]
    L: float
    f_star: float | None = None
    H0: float | None = None
    info: dict = {}


def init_x0(domain: ProductDomain, seed: int | np.random.Generator) -> BlockVector:
    """Starting point ``x_0^i = lmo_i(c^i)`` with standard-normal ``c^i``.

    Oracle calls made here are not counted.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    blocks = []
    for i, shape in enumerate(domain.shapes):
        c = rng.standard_normal(shape)
        blocks.append(np.array(domain.lmo(i, c, count=False), dtype=float))
    return BlockVector(blocks, copy=False)


def intersect_problem(n: int, seed: int = 0) -> Problem:
    """Box/spectraplex feasibility problem of side ``n``."""
    domain = ProductDomain([Box((n, n), -1.0, 1.0 / n), Spectraplex(n)])
    obj = QuadraticDistance()
    x0 = init_x0(domain, np.random.default_rng((seed, 1)))
    return Problem(obj, domain, x0, expensive=1, L=obj.lipschitz, f_star=0.0, info={"D2": domain.diameter**2})


def sample_dcquad(n: int, rng: np.random.Generator, cap: int = RESAMPLE_CAP) -> CollatedQuadraticDifference:
    """Draw ``A, B`` as PSD projections of Gaussian matrices until ``A - B`` is indefinite."""
    for _ in range(cap):
        A = psd_project(rng.standard_normal((n, n)))
        B = psd_project(rng.standard_normal((n, n)))
        obj = CollatedQuadraticDifference(A, B)
        if obj.lipschitz >= 1e-8 and obj.is_indefinite():
            return obj
    raise RuntimeError(f"no indefinite A - B after {cap} draws (n={n})")


def dcquad_h0_bound(obj: CollatedQuadraticDifference, f_x0: float) -> float:
    """``f(x0) - 0.5 lambda_min(M) (n^2 + 1)``, an upper bound on ``f(x0) - inf f``.

    Uses ``<X, XM> >= lambda_min(M) ||X||_F^2`` and ``||X||_F^2 <= n^2 + 1``
    on the feasible set; ``lambda_min`` comes from a dense eigensolver.
    """
    lam = float(np.linalg.eigvalsh(0.5 * (obj.M + obj.M.T))[0])
    return f_x0 - 0.5 * min(lam, 0.0) * (obj.n**2 + 1)


def dcquad_problem(n: int, seed: int = 0) -> Problem:
    """Difference-of-convex quadratic over ``l_inf`` rows and a nuclear-norm ball."""
    obj = sample_dcquad(n, np.random.default_rng((seed, 0)))
    domain = ProductDomain([LinfBall((n,), 1.0) for _ in range(n)] + [NuclearBall((n, n), 1.0)])
    x0 = init_x0(domain, np.random.default_rng((seed, 1)))
    H0 = dcquad_h0_bound(obj, obj.value(x0))
    return Problem(obj, domain, x0, expensive=n, L=obj.lipschitz, H0=H0, info={"D2": domain.diameter**2})


PROBLEMS: dict[str, Callable[[int, int], Problem]] = {"intersect": intersect_problem, "dcquad": dcquad_problem}


# --------------------------------------------------------------------------
# running


@dataclass
class InstanceResult:
    """Trace rows and scalars of one run; the full solver output only on request."""

    seed: int
    rows: list[dict]
    K: int | None
    L: float
    D2: float
    H0: float | None
    f_star: float | None
    infeasible_stored: int
    run: object = None


@dataclass
class StrategyResult:
    strategy: str
    instances: list[InstanceResult]
    average: list[dict]
    paths: dict[str, Path] = field(default_factory=dict)


def _trace_rows(run, trace_every: int, f_star, dmin_at: dict[int, float], m: int) -> list[dict]:
    T = run.iterations
    fv = run.f_values
    rows = []
    for t in list(range(0, T, trace_every)) + [T]:
        if rows and rows[-1]["iter"] == t:
            continue
        lmo, fe, ge, wall, M = run.state_counts(t)
        row = {"iter": t, "time_s": wall, "f": float(fv[t])}
        row["primal"] = None if f_star is None else float(fv[t]) - f_star
        row["dmin"] = dmin_at.get(t)
        for i in range(m):
            row[f"lmo_{i + 1}"] = int(lmo[i])
        row["f_evals"] = int(fe)
        row["grad_evals"] = int(ge)
        row["M_t"] = M
        rows.append(row)
    return rows


def run_instance(
    cfg: ExperimentConfig,
    strategy: str,
    index: int,
    factory: Callable[[int, int], Problem] | None = None,
    keep_run: bool = False,
) -> InstanceResult:
    """Run ``strategy`` on instance ``index`` of the configured experiment."""
    seed = cfg.base_seed + index
    factory = factory or PROBLEMS[cfg.experiment]
    prob = factory(cfg.n, seed)
    m = prob.domain.m
    schedule = parse_schedule(strategy, m, expensive=prob.expensive, seed=seed)
    store = cfg.store_every
    if store is None and cfg.experiment == "dcquad":
        store = schedule.K
    rule = cfg.step_rule()
    if rule is None:
        run = run_short_step(prob.obj, prob.domain, schedule, prob.x0, cfg.iterations, L=prob.L, store_every=store)
    else:
        run = run_adaptive(
            prob.obj, prob.domain, schedule, prob.x0, cfg.iterations, M0=rule.M0, eta=rule.eta, tau=rule.tau,
            while_cap=rule.while_cap, store_every=store,
        )

    # post-hoc gaps at stored iterates; running minimum reported at those rows only
    dmin_at = {}
    best = math.inf
    bad = 0
    for t in sorted(run.stored_iterates):
        x = run.stored_iterates[t]
        if not prob.domain.contains(x):
            bad += 1
        best = min(best, fw_gap(prob.obj.gradient(x), x, prob.domain, count=False))
        dmin_at[t] = best
    rows = _trace_rows(run, cfg.trace_every, prob.f_star, dmin_at, m)
    return InstanceResult(
        seed=seed,
        rows=rows,
        K=schedule.K,
        L=prob.L,
        D2=prob.info.get("D2", prob.domain.diameter**2),
        H0=prob.H0,
        f_star=prob.f_star,
        infeasible_stored=bad,
        run=run if keep_run else None,
    )


def average_rows(traces: Sequence[Sequence[dict]]) -> list[dict]:
    """Pointwise mean over instances; a cell is blank if any instance leaves it blank.

    Integer columns stay integers when the mean is integral.
    """
    if not traces:
        return []
    n_rows = {len(tr) for tr in traces}
    if len(n_rows) != 1:
        raise ValueError("traces have different lengths")
    out = []
    for cells in zip(*traces):
        iters = {c["iter"] for c in cells}
        if len(iters) != 1:
            raise ValueError("traces are not aligned on iter")
        row = {}
        for key in cells[0]:
            vals = [c[key] for c in cells]
            if any(v is None for v in vals):
                row[key] = None
            elif all(isinstance(v, int) for v in vals) and sum(vals) % len(vals) == 0:
                row[key] = sum(vals) // len(vals)
            else:
                row[key] = float(math.fsum(vals) / len(vals))
        out.append(row)
    return out


def _metadata(cfg: ExperimentConfig, strategy: str, res: Sequence[InstanceResult], kind: str) -> dict:
    first = res[0]
    meta = {
        "experiment": cfg.experiment,
        "strategy": strategy,
        "kind": kind,
        "n": cfg.n,
        "iterations": cfg.iterations,
        "step": cfg.step if cfg.step_rule() is None else "adaptive:{0.M0!r},{0.eta!r},{0.tau!r}".format(cfg.step_rule()),
        "trace_every": cfg.trace_every,
        "store_every": "" if cfg.store_every is None else cfg.store_every,
        "base_seed": cfg.base_seed,
        "seeds": " ".join(str(r.seed) for r in res),
        "K": "" if first.K is None else first.K,
        "L": repr(first.L),
        "D2": repr(first.D2),
        "f_star": "" if first.f_star is None else repr(first.f_star),
    }
    if first.H0 is not None:
        meta["H0"] = " ".join(repr(r.H0) for r in res)
    return meta


def run_experiment(
    cfg: ExperimentConfig,
    factory: Callable[[int, int], Problem] | None = None,
    keep_runs: bool = False,
) -> dict[str, StrategyResult]:
    """Run every configured strategy over all instances and write traces.

    With ``cfg.out`` set, each strategy produces ``<experiment>_<tag>_trace.csv``
    (instance 0) and ``<experiment>_<tag>_avg.csv`` (pointwise average).

    Raises
    ------
    ConfigError
        For unusable strategies or a ``custom`` experiment without a factory.
    """
    if cfg.experiment == "custom" and factory is None:
        raise ConfigError("the custom experiment needs a problem factory")
    strategies = list(cfg.strategies) or default_strategies(cfg.experiment, cfg.n)
    check_strategies(cfg, strategies, factory)
    results = {}
    for strategy in strategies:
        if cfg.workers > 1 and factory is None:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futs = [pool.submit(run_instance, cfg, strategy, k, None, keep_runs) for k in range(cfg.instances)]
                insts = [f.result() for f in futs]
        else:
            insts = [run_instance(cfg, strategy, k, factory, keep_runs) for k in range(cfg.instances)]
        avg = average_rows([r.rows for r in insts])
        sr = StrategyResult(strategy, insts, avg)
        if cfg.out is not None:
            m = sum(1 for k in insts[0].rows[0] if k.startswith("lmo_"))
            base = Path(cfg.out) / f"{cfg.experiment}_{strategy_tag(strategy)}"
            sr.paths["trace"] = write_trace_csv(
                insts[0].rows, f"{base}_trace.csv", m, _metadata(cfg, strategy, insts[:1], "trace")
            )
            sr.paths["avg"] = write_trace_csv(avg, f"{base}_avg.csv", m, _metadata(cfg, strategy, insts, "average"))
        results[strategy] = sr
    return results


def check_strategies(cfg: ExperimentConfig, strategies: Sequence[str], factory=None) -> None:
    """Parse each strategy against the experiment's block layout, raising :class:`ConfigError`."""
    if cfg.experiment == "intersect":
        m, expensive = 2, 1
    elif cfg.experiment == "dcquad":
        m, expensive = cfg.n + 1, cfg.n
    else:
        prob = factory(cfg.n, cfg.base_seed)
        m, expensive = prob.domain.m, prob.expensive
    for s in strategies:
        try:
            parse_schedule(s, m, expensive=expensive, seed=0)
        except ScheduleSpecError as exc:
            raise ConfigError(f"strategy {s!r}: {exc}") from None


def run_experiment_intersect(cfg: ExperimentConfig, keep_runs: bool = False) -> dict[str, StrategyResult]:
    return run_experiment(replace(cfg, experiment="intersect"), keep_runs=keep_runs)


def run_experiment_dcquad(cfg: ExperimentConfig, keep_runs: bool = False) -> dict[str, StrategyResult]:
    return run_experiment(replace(cfg, experiment="dcquad"), keep_runs=keep_runs)


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "InstanceResult",
    "Problem",
    "StrategyResult",
    "average_rows",
    "check_strategies",
    "dcquad_h0_bound",
    "dcquad_problem",
    "default_strategies",
    "init_x0",
    "intersect_problem",
    "parse_step",
    "run_experiment",
    "run_experiment_dcquad",
    "run_experiment_intersect",
    "run_instance",
    "sample_dcquad",
    "strategy_tag",
]
