"""Block-activation schedules and the K-coverage check.

A schedule answers ``next(t)`` with the sorted tuple of blocks activated
at iteration ``t``. Each built-in schedule declares a window ``K`` such
that every block appears in every ``K`` consecutive activation sets.

Randomized schedules draw from ``numpy.random.Generator(PCG64(seed))``
in iteration order, so a given seed always yields the same sequence no
matter how the schedule is queried.
"""

from __future__ import annotations

import warnings
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .core import as_index_set


class ScheduleSpecError(ValueError):
    """Malformed or out-of-range schedule specification."""


class CoverageReport(NamedTuple):
    ok: bool
    first_violation: int | None = None
    missing: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_coverage(sequence: Sequence[Iterable[int]], K: int, m: int) -> CoverageReport:
    """Check that each of ``range(m)`` meets every window of ``K`` consecutive sets.

    On failure the report carries the first window start ``t`` that misses
    a block, and the smallest such block.
    """
    T = len(sequence)
    if K < 1:
        raise ValueError("K must be a positive integer")
    if T < K:
        raise ValueError(f"need at least K={K} activation sets, got {T}")
    last = [-1] * m
    first_bad: tuple[int, int] | None = None

    def note(i: int, start: int) -> None:
        nonlocal first_bad
        if start <= T - K and (first_bad is None or (start, i) < first_bad):
            first_bad = (start, i)

    for t, active in enumerate(sequence):
        for i in active:
            if t - last[i] - 1 >= K:
                note(i, last[i] + 1)
            last[i] = t
    for i in range(m):
        if T - last[i] - 1 >= K:
            note(i, last[i] + 1)
    if first_bad is None:
        return CoverageReport(True)
    return CoverageReport(False, first_bad[0], first_bad[1])


class Schedule:
    """Base class: subclasses implement ``_generate(t)`` for sequential ``t``."""

    name = "schedule"

    def __init__(self, m: int, K: int | None = None, seed: int | None = None):
        if m < 1:
            raise ScheduleSpecError("m must be positive")
        self.m = m
        self.K = K
        self.seed = seed
        self._history: list[tuple[int, ...]] = []

    def next(self, t: int) -> tuple[int, ...]:
        if t < 0:
            raise ValueError("iteration index must be nonnegative")
        while len(self._history) <= t:
            self._history.append(self._generate(len(self._history)))
        return self._history[t]

    def sequence(self, T: int) -> list[tuple[int, ...]]:
        return [self.next(t) for t in range(T)]

    def check(self, executed: Sequence[tuple[int, ...]]) -> None:
        """Hook called by the engines after a run; no-op for built-ins."""

    def _generate(self, t: int) -> tuple[int, ...]:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(m={self.m}, K={self.K})"


class Full(Schedule):
    name = "full"

    def __init__(self, m: int):
        super().__init__(m, K=1)
        self._all = tuple(range(m))

    def _generate(self, t):
        return self._all


class Cyclic(Schedule):
    name = "cyclic"

    def __init__(self, m: int):
        super().__init__(m, K=m)

    def _generate(self, t):
        return (t % self.m,)


class PCyclic(Schedule):
    """Singletons following a fresh uniform permutation every ``m`` iterations.

    ``K = 2m - 1``: a block may come first in one cycle and last in the next.
    """

    name = "pcyclic"

    def __init__(self, m: int, seed: int = 0):
        super().__init__(m, K=2 * m - 1, seed=seed)
        self._rng = np.random.default_rng(seed)
        self._perm = None

    def _generate(self, t):
        if t % self.m == 0:
            self._perm = self._rng.permutation(self.m)
        return (int(self._perm[t % self.m]),)


def _expensive_set(expensive, m: int) -> tuple[int, ...]:
    if expensive is None:
        expensive = m - 1
    if isinstance(expensive, (int, np.integer)):
        expensive = (int(expensive),)
    try:
        return as_index_set(expensive, m)
    except ValueError as exc:
        raise ScheduleSpecError(str(exc)) from None


class QLazy(Schedule):
    """All blocks when ``t % q == 0``, otherwise only the cheap ones."""

    name = "qlazy"

    def __init__(self, m: int, q: int, expensive=None):
        if q < 1:
            raise ScheduleSpecError(f"q must be >= 1, got {q}")
        super().__init__(m, K=q)
        self.q = q
        self.expensive = _expensive_set(expensive, m)
        self._all = tuple(range(m))
        self._cheap = tuple(i for i in range(m) if i not in self.expensive)
        if q > 1 and not self._cheap:
            raise ScheduleSpecError("q-lazy schedule has no cheap blocks")

    def _generate(self, t):
        return self._all if t % self.q == 0 else self._cheap


class PQLazy(Schedule):
    """All blocks when ``t % q == 0``, otherwise a random ``p``-subset of the cheap blocks.

    Subsets are drawn without replacement by a partial Fisher-Yates shuffle
    that consumes exactly ``p`` draws per lazy iteration.
    """

    name = "pqlazy"

    def __init__(self, m: int, p: int, q: int, expensive=None, seed: int = 0):
        if q < 1:
            raise ScheduleSpecError(f"q must be >= 1, got {q}")
        super().__init__(m, K=q, seed=seed)
        self.expensive = _expensive_set(expensive, m)
        self._cheap = [i for i in range(m) if i not in self.expensive]
        if not 1 <= p <= len(self._cheap):
            raise ScheduleSpecError(f"p must lie in [1, {len(self._cheap)}], got {p}")
        self.p, self.q = p, q
        self._all = tuple(range(m))
        self._rng = np.random.default_rng(seed)

    def _generate(self, t):
        if t % self.q == 0:
            return self._all
        pool = list(self._cheap)
        N = len(pool)
        for j in range(self.p):
            k = int(self._rng.integers(j, N))
            pool[j], pool[k] = pool[k], pool[j]
        return tuple(sorted(pool[: self.p]))


class Custom(Schedule):
    """User-supplied activation sets with a claimed coverage window ``K``.

    ``rule`` is either a sequence of index collections (indexed by ``t``)
    or a callable ``t -> indices``. The claim is checked after each run and
    a :class:`RuntimeWarning` is issued if the executed prefix violates it.
    """

    name = "custom"

    def __init__(self, m: int, rule: Sequence[Iterable[int]] | Callable[[int], Iterable[int]], K: int | None = None):
        super().__init__(m, K=K)
        self._rule = rule

    def _generate(self, t):
        raw = self._rule(t) if callable(self._rule) else self._rule[t]
        return as_index_set(raw, self.m)

    def check(self, executed):
        if self.K is None or len(executed) < self.K:
            return
        report = verify_coverage(executed, self.K, self.m)
        if not report.ok:
            warnings.warn(
                f"custom schedule violates its claimed K={self.K}: block {report.missing} "
                f"missing from the window starting at t={report.first_violation}",
                RuntimeWarning,
                stacklevel=3,
            )


def parse_schedule(spec: str, m: int, expensive=None, seed: int = 0) -> Schedule:
    """Build a schedule from ``full``, ``cyclic``, ``pcyclic``, ``qlazy:<q>`` or ``pqlazy:<p>,<q>``.

    ``expensive`` names the block(s) the lazy schedules postpone; it
    defaults to the last block.
    """
    spec = spec.strip().lower()
    kind, _, arg = spec.partition(":")
    try:
        if kind == "full" and not arg:
            return Full(m)
        if kind == "cyclic" and not arg:
            return Cyclic(m)
        if kind == "pcyclic" and not arg:
            return PCyclic(m, seed=seed)
        if kind == "qlazy":
            return QLazy(m, int(arg), expensive=expensive)
        if kind == "pqlazy":
            p, q = arg.split(",")
            return PQLazy(m, int(p), int(q), expensive=expensive, seed=seed)
    except ValueError as exc:
        if isinstance(exc, ScheduleSpecError):
            raise
        raise ScheduleSpecError(f"bad schedule spec {spec!r}: {exc}") from None
    raise ScheduleSpecError(f"unknown schedule spec {spec!r}")
