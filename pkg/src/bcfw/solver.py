"""Block-coordinate Frank-Wolfe engines and their diagnostics.

Two engines are provided:

* :func:`run_short_step` -- one gradient per iteration, LMOs only for the
  activated blocks, step ``min(1, G_i / (L ||v^i - x^i||^2))`` per block.
* :func:`run_adaptive` -- the same update with a backtracked smoothness
  estimate ``M``; each candidate is accepted once
  ``f(x) - f(y) - <grad f(y), x - y> >= ||grad f(x) - grad f(y)||^2 / (2M)``.

The remaining functions evaluate gaps, the Huber perspective ``rho`` used
by the rate analysis, reactivation gaps, and the convex and nonconvex
rate bounds so that runs can be checked against them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .core import BlockVector, as_index_set, blend_block
from .lmo import ProductDomain

GAP_ABORT = -1e-6
WHILE_SLACK = 1e-12


class GapError(RuntimeError):
    """A partial Frank-Wolfe gap came out clearly negative (broken oracle)."""


class WhileCapError(RuntimeError):
    """The adaptive backtracking loop hit its pass limit."""

    def __init__(self, t: int, M: float, cap: int):
        super().__init__(
            f"adaptive step at iteration {t}: smoothness test still failing after {cap} passes "
            f"(last estimate M={M:.6g}); objective may be nonconvex or nonsmooth"
        )
        self.t = t
        self.M = M


@dataclass(frozen=True)
class ShortStep:
    """Short step with global constant ``L``.

    ``block_constants`` replaces ``L`` per block; this is only sound for
    singleton activation and is kept for reproducing the known failure
    of componentwise constants under parallel updates.
    """

    L: float
    block_constants: Sequence[float] | None = None

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")


@dataclass(frozen=True)
class Adaptive:
    M0: float
    eta: float = 0.9
    tau: float = 2.0
    while_cap: int = 100

    def __post_init__(self):
        if not self.M0 > 0:
            raise ValueError("M0 must be positive")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if not self.tau > 1:
            raise ValueError("tau must exceed 1")
        if self.while_cap < 1:
            raise ValueError("while_cap must be at least 1")


@dataclass
class IterationRecord:
    """What happened during iteration ``t`` (the step from ``x_t`` to ``x_{t+1}``).

    Counters are cumulative at the end of the iteration; ``f_value`` is
    ``f(x_t)`` and ``M`` is the accepted estimate ``M_{t+1}`` (adaptive only).
    """

    t: int
    f_value: float
    activated: tuple[int, ...]
    partial_gaps: dict[int, float]
    gamma: dict[int, float]
    lmo_calls: tuple[int, ...]
    f_evals: int
    grad_evals: int
    wall_time: float
    M: float | None = None
    while_passes: int = 0


@dataclass
class RunResult:
    x: BlockVector
    records: list[IterationRecord]
    f_final: float
    x0: BlockVector
    stored_iterates: dict[int, BlockVector] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def f_values(self) -> np.ndarray:
        """``f(x_t)`` for ``t = 0..T``."""
        return np.array([r.f_value for r in self.records] + [self.f_final])

    @property
    def activations(self) -> list[tuple[int, ...]]:
        return [r.activated for r in self.records]

    def state_counts(self, t: int) -> tuple[tuple[int, ...], int, int, float, float | None]:
        """LMO counts, f/grad evaluations, time and ``M_t`` after ``t`` iterations."""
        if t == 0:
            m = len(self.x.blocks)
            M0 = self.config.get("M0")
            init = self.config.get("initial_evals", 0)
            return (0,) * m, init, init, 0.0, M0
        r = self.records[t - 1]
        return r.lmo_calls, r.f_evals, r.grad_evals, r.wall_time, r.M


# --------------------------------------------------------------------------
# scalar helpers


def huber_perspective(x, b):
    """``rho(x, b) = |x| - b/2`` if ``|x| >= b`` else ``x^2 / (2b)``; ``b > 0``."""
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr <= 0):
        raise ValueError("rho requires b > 0")
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.where(ax >= b_arr, ax - 0.5 * b_arr, ax * ax / (2.0 * b_arr))
    return float(out) if out.ndim == 0 else out


rho = huber_perspective


def short_step_gamma(G_i: float, L_or_M: float, dist_sq: float) -> float:
    """``min(1, G_i / (L dist_sq))``, with ``0`` when the vertex equals the iterate."""
    if dist_sq < 1e-16:
        return 0.0
    G_i = max(G_i, 0.0)
    return min(1.0, G_i / (L_or_M * dist_sq))


def _clip_gap(G: float, i: int, t: int | None = None) -> float:
    if G < GAP_ABORT:
        where = f" at iteration {t}" if t is not None else ""
        raise GapError(f"partial gap of block {i} is {G:.3e}{where}; LMO result is not optimal")
    return max(G, 0.0)


# --------------------------------------------------------------------------
# gaps


def partial_gap(g: BlockVector, x: BlockVector, J: Iterable[int], domain: ProductDomain, count: bool = True):
    """Partial Frank-Wolfe gap over the blocks ``J`` and the LMO vertices used.

    Returns
    -------
    gap : float
        ``sum_{i in J} <g^i, x^i - v^i>`` (tiny negative rounding clipped to 0).
    vertices : dict
        ``{i: v^i}`` for reuse by the caller.
    """
    V = domain.lmo_product(g, J, count=count)
    gap = 0.0
    for i, v in V.items():
        gap += _clip_gap(float(np.vdot(g.blocks[i], x.blocks[i] - v)), i)
    return gap, V


def fw_gap(g: BlockVector, x: BlockVector, domain: ProductDomain, count: bool = True) -> float:
    """Full Frank-Wolfe gap ``max_v <g, x - v>`` over the product domain."""
    return partial_gap(g, x, range(domain.m), domain, count=count)[0]


# --------------------------------------------------------------------------
# engines


def _check_start(domain: ProductDomain, x0: BlockVector) -> None:
    if len(x0.blocks) != domain.m:
        raise ValueError(f"x0 has {len(x0.blocks)} blocks, domain has {domain.m}")
    bad = domain.block_violations(x0)
    if bad:
        raise ValueError(f"x0 is infeasible in blocks {bad}")


def _lipschitz_of(obj, L: float | None) -> float:
    if L is None:
        L = getattr(obj, "lipschitz", None)
    if L is None or not L > 0:
        raise ValueError("a positive smoothness constant is required for short steps")
    return float(L)


def _run_jacobi(obj, domain, schedule, x0, T, step: Callable, store_every, config) -> RunResult:
    # shared loop: gamma for every active block is computed at x_t, then all blocks move
    _check_start(domain, x0)
    if T < 1:
        raise ValueError("T must be at least 1")
    x = x0.copy()
    base = list(domain.counts)
    stored = {}
    records = []
    grad_evals = 0
    start = time.perf_counter()
    for t in range(T):
        if store_every and t % store_every == 0:
            stored[t] = x.copy()
        I = as_index_set(schedule.next(t), domain.m)
        f_t = obj.value(x)
        g = obj.gradient(x)
        grad_evals += 1
        V = domain.lmo_product(g, I)
        gaps, gammas = {}, {}
        for i in I:
            d = x.blocks[i] - V[i]
            G = _clip_gap(float(np.vdot(g.blocks[i], d)), i, t)
            gaps[i] = G
            gammas[i] = step(x, g, i, V[i], G, float(np.vdot(d, d)))
        for i in I:
            blend_block(x, i, V[i], gammas[i])
        records.append(
            IterationRecord(
                t=t,
                f_value=f_t,
                activated=I,
                partial_gaps=gaps,
                gamma=gammas,
                lmo_calls=tuple(c - b for c, b in zip(domain.counts, base)),
                f_evals=0,
                grad_evals=grad_evals,
                wall_time=time.perf_counter() - start,
            )
        )
    if store_every and T % store_every == 0:
        stored[T] = x.copy()
    schedule.check([r.activated for r in records])
    return RunResult(x=x, records=records, f_final=obj.value(x), x0=x0.copy(), stored_iterates=stored, config=config)


def run_short_step(
    obj,
    domain: ProductDomain,
    schedule,
    x0: BlockVector,
    T: int,
    L: float | None = None,
    block_constants: Sequence[float] | None = None,
    store_every: int | None = None,
) -> RunResult:
    """Block-coordinate Frank-Wolfe with short steps.

    Parameters
    ----------
    obj : SmoothObjective
        Objective; ``obj.lipschitz`` is used when ``L`` is omitted.
    domain : ProductDomain
    schedule : Schedule
        Supplies the activated blocks ``I_t``.
    x0 : BlockVector
        Feasible starting point (checked at tolerance 1e-8).
    T : int
        Number of iterations.
    L : float, optional
        Smoothness constant.
    block_constants : sequence of float, optional
        Per-block constants replacing ``L`` in the step.
    store_every : int, optional
        Keep a copy of ``x_t`` whenever ``t % store_every == 0``.

    Returns
    -------
    RunResult
        Per-iteration records; ``f_evals`` stays 0 because the method never
        needs function values (the recorded ``f(x_t)`` are diagnostics).
    """
    L = _lipschitz_of(obj, L)
    consts = None
    if block_constants is not None:
        consts = [float(c) for c in block_constants]
        if len(consts) != domain.m or min(consts) <= 0:
            raise ValueError("block_constants needs one positive value per block")

    def step(x, g, i, v, G, dist_sq):
        return short_step_gamma(G, L if consts is None else consts[i], dist_sq)

    config = {"step": "short", "L": L, "block_constants": consts, "initial_evals": 0}
    return _run_jacobi(obj, domain, schedule, x0, T, step, store_every, config)


def componentwise_linesearch_gamma(obj, x: BlockVector, i: int, v_i: np.ndarray, g: BlockVector | None = None) -> float:
    """Exact minimizer over ``[0, 1]`` of ``f`` along ``v^i - x^i`` in block ``i``.

    Valid for objectives that are quadratic along lines: the curvature is
    read off from ``f(x)``, ``f(x + d)`` and the directional derivative.
    """
    if g is None:
        g = obj.gradient(x)
    d = v_i - x.blocks[i]
    slope = float(np.vdot(g.blocks[i], d))
    if slope >= 0:
        return 0.0
    y = BlockVector.wrap(x.blocks)
    y.blocks[i] = np.asarray(v_i, dtype=float)
    curv = 2.0 * (obj.value(y) - obj.value(x) - slope)
    if curv <= 0:
        return 1.0
    return min(1.0, -slope / curv)


def run_componentwise_linesearch(obj, domain, schedule, x0, T, store_every=None) -> RunResult:
    """Parallel block updates with per-block exact line search.

    This rule can cycle without converging; it exists to demonstrate that
    failure, not as a production step rule.
    """

    def step(x, g, i, v, G, dist_sq):
        return componentwise_linesearch_gamma(obj, x, i, v, g)

    return _run_jacobi(obj, domain, schedule, x0, T, step, store_every, {"step": "linesearch", "initial_evals": 0})


def run_adaptive(
    obj,
    domain: ProductDomain,
    schedule,
    x0: BlockVector,
    T: int,
    M0: float,
    eta: float = 0.9,
    tau: float = 2.0,
    while_cap: int = 100,
    store_every: int | None = None,
) -> RunResult:
    """Block-coordinate Frank-Wolfe with a backtracked smoothness estimate.

    Each iteration starts from ``eta * M_t`` and multiplies by ``tau``
    until the candidate ``y`` satisfies::

        f(x_t) - f(y) - <grad f(y), x_t - y> >= ||grad f(x_t) - grad f(y)||^2 / (2 M)

    up to a rounding slack of ``1e-12 * max(1, |f(x_t)|)``. LMO vertices
    are computed once per iteration and reused across passes. Every
    evaluation of ``f`` and ``grad f`` is counted.

    Raises
    ------
    WhileCapError
        If ``while_cap`` passes do not satisfy the test.
    """
    rule = Adaptive(M0, eta, tau, while_cap)
    _check_start(domain, x0)
    if T < 1:
        raise ValueError("T must be at least 1")
    x = x0.copy()
    base = list(domain.counts)
    stored = {}
    records = []
    start = time.perf_counter()
    f_x = obj.value(x)
    g = obj.gradient(x)
    f_evals = grad_evals = 1
    M = rule.M0
    for t in range(T):
        if store_every and t % store_every == 0:
            stored[t] = x.copy()
        I = as_index_set(schedule.next(t), domain.m)
        V = domain.lmo_product(g, I)
        gaps, dists = {}, {}
        for i in I:
            d = x.blocks[i] - V[i]
            gaps[i] = _clip_gap(float(np.vdot(g.blocks[i], d)), i, t)
            dists[i] = float(np.vdot(d, d))
        M_try = rule.eta * M
        passes = 0
        slack = WHILE_SLACK * max(1.0, abs(f_x))
        while True:
            passes += 1
            gammas = {i: short_step_gamma(gaps[i], M_try, dists[i]) for i in I}
            y = BlockVector.wrap(x.blocks)
            for i in I:
                y.blocks[i] = x.blocks[i].copy()
                blend_block(y, i, V[i], gammas[i])
            f_y = obj.value(y)
            g_y = obj.gradient(y)
            f_evals += 1
            grad_evals += 1
            lhs = f_x - f_y - sum(float(np.vdot(g_y.blocks[i], x.blocks[i] - y.blocks[i])) for i in I)
            diff = sum(float(np.vdot(a - b, a - b)) for a, b in zip(g.blocks, g_y.blocks))
            if lhs >= diff / (2.0 * M_try) - slack:
                break
            if passes >= rule.while_cap:
                raise WhileCapError(t, M_try, rule.while_cap)
            M_try *= rule.tau
        records.append(
            IterationRecord(
                t=t,
                f_value=f_x,
                activated=I,
                partial_gaps=gaps,
                gamma=gammas,
                lmo_calls=tuple(c - b for c, b in zip(domain.counts, base)),
                f_evals=f_evals,
                grad_evals=grad_evals,
                wall_time=time.perf_counter() - start,
                M=M_try,
                while_passes=passes,
            )
        )
        x, f_x, g, M = y, f_y, g_y, M_try
    if store_every and T % store_every == 0:
        stored[T] = x.copy()
    schedule.check([r.activated for r in records])
    config = {"step": "adaptive", "M0": rule.M0, "eta": rule.eta, "tau": rule.tau, "initial_evals": 1}
    return RunResult(x=x, records=records, f_final=f_x, x0=x0.copy(), stored_iterates=stored, config=config)


# --------------------------------------------------------------------------
# reactivation gaps and rate bounds


def extra_gap_A(
    obj,
    domain: ProductDomain,
    iterates: Mapping[int, BlockVector],
    activations: Sequence[Iterable[int]],
    t: int,
    K: int,
) -> float:
    """Gap credit for blocks activated more than once in the window ``t .. t+K-1``.

    Sums, for ``k = 1 .. K-1``, the partial gap at ``x_{t+k}`` over the
    blocks of ``I_{t+k-1}`` that are activated again before ``t+K``.
    Evaluated offline; oracle calls are not counted.
    """
    if t + K - 1 >= len(activations):
        raise ValueError(f"activation history too short for window [{t}, {t + K - 1}]")
    total = 0.0
    for k in range(1, K):
        later = set()
        for s in range(t + k, t + K):
            later.update(activations[s])
        J = set(activations[t + k - 1]) & later
        if not J:
            continue
        if t + k not in iterates:
            raise ValueError(f"iterate x_{t + k} was not stored")
        x = iterates[t + k]
        gap, _ = partial_gap(obj.gradient(x), x, J, domain, count=False)
        total += gap
    return total


def convex_rate_bound(n: int, K: int, L: float, D: float, A_terms: Sequence[float] = (), f_gap_at_K: float | None = None) -> float:
    """Upper bound on ``f(x_{nK}) - f*`` for short steps on a convex objective.

    ``A_terms[p]`` is the reactivation gap ``A_{pK}``; missing entries count
    as zero. For ``n >= 2`` the terms ``p = 1 .. n-1`` enter the
    denominator weighted by ``h = f_gap_at_K``; if ``h <= 0`` (optimum hit
    exactly) the A-free bound ``2KLD^2 / (n-1)`` is returned.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    A = list(A_terms)
    b = K * L * D * D
    if n == 1:
        return b / 2.0 - (A[0] if A else 0.0)
    terms = A[1:n]
    if not any(terms) or f_gap_at_K is None or f_gap_at_K <= 0:
        return 2.0 * b / (n - 1)
    h = f_gap_at_K
    extra = sum(2.0 * a / h + (a / h) ** 2 for a in terms)
    return 2.0 * b / (n - 1 + extra)


def nonconvex_rate_bound(n: int, K: int, L: float, D: float, H0: float) -> float:
    """Upper bound on ``min_{p < n} G(x_{pK})`` for short steps on a smooth objective.

    ``H0`` bounds ``f(x_0) - inf f``. The linear branch
    ``2 H0 / n + K L D^2 / 2`` applies while ``n <= 4 H0 / (K L D^2)``,
    the square-root branch ``2 D sqrt(H0 K L / n)`` afterwards; the two
    agree at the switch. Reactivation gaps are dropped (they only tighten).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if H0 < 0:
        raise ValueError("H0 must be nonnegative")
    b = K * L * D * D
    if n * b <= 4.0 * H0:
        return 2.0 * H0 / n + b / 2.0
    return 2.0 * D * math.sqrt(H0 * K * L / n)


def recursion_bound(t: int, b: float, h1: float, a: Sequence[float]) -> float:
    """Bound on ``h_t`` for sequences with ``h_t - h_{t+1} >= rho(h_t + a_t, b)``.

    ``t = 1`` gives ``b/2 - a_0``; for ``t >= 2`` the bound uses the
    observed ``h1`` and ``a_1 .. a_{t-1}``.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    if t == 1:
        return b / 2.0 - a[0]
    if h1 <= 0:
        return 0.0
    s = sum(2.0 * ak / h1 + (ak / h1) ** 2 for ak in a[1:t])
    return 2.0 * b / (t - 1 + 2.0 * b / h1 + s)


def adaptive_eval_bound(t: int, L: float, M0: float, eta: float, tau: float) -> int:
    """Most ``f``/``grad f`` evaluations the adaptive engine may spend in ``t`` iterations."""
    expo = (-t * math.log(eta) + math.log(L) - math.log(M0)) / math.log(tau)
    return t + 1 + max(0, math.ceil(expo))


def m_burn_in(M0: float, eta: float, tau: float, L: float) -> int | None:
    """Smallest ``t0 >= 0`` with ``eta**t0 * M0 <= tau * L``; ``None`` if it never happens."""
    if M0 <= tau * L:
        return 0
    if eta >= 1.0:
        return None
    t0 = 0
    M = M0
    while M > tau * L:
        M *= eta
        t0 += 1
    return t0
