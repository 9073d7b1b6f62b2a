"""Selection algorithms and optimality certificates for the placement objective.

Greedy selection with lowest-index tie-breaking is the reference method; the
lazy variant must reproduce its choices exactly while skipping stale
re-evaluations. Exhaustive enumeration, random placement, curvature, and the
constant-factor bound provide the certificate machinery.
"""

from __future__ import annotations

import heapq
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleError, NumericalError
from .objective import (
    ObjectiveContext,
    empty_state,
    gram_matrix,
    marginal_gain,
    objective_value,
    update_state,
)

DEFAULT_ENUMERATION_CAP = 1_000_000
# Slack for float noise when clamping curvature ratios into [0, 1].
_CURVATURE_GUARD = 1e-6
_EXHAUSTIVE_BATCH = 8192


@dataclass(frozen=True)
class SelectionResult:
    """Trajectory of one selection run: picks, per-step gains, cumulative values."""

    method: str
    chosen: tuple
    gains: tuple
    values: tuple
    final_value: float
    evaluations: int


@dataclass(frozen=True)
class Certificate:
    """Curvature-based worst-case guarantee for greedy selection."""

    curvature: float
    tight_factor: float
    loose_factor: float
    optimum: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.curvature <= 1.0:
            raise ValueError("curvature must lie in [0, 1]")
        if not self.loose_factor <= self.tight_factor <= 1.0 + 1e-12:
            raise ValueError("bound factors out of order")


@dataclass(frozen=True)
class CurvatureScan:
    curvature: float
    argmin_index: int
    excluded: tuple


@dataclass(frozen=True)
class SubmodularityReport:
    """Worst observed margins over sampled chains; margins <= tolerance means no violation."""

    trials: int
    tolerance: float
    worst_monotonicity_margin: float
    worst_submodularity_margin: float
    violation_count: int

    @property
    def passed(self) -> bool:
        return self.violation_count == 0


def _check_budget(ctx: ObjectiveContext, m: int) -> None:
    if not 1 <= m <= ctx.n_candidates:
        raise ValueError(f"budget {m} outside [1, {ctx.n_candidates}]")


def _trajectory(ctx: ObjectiveContext, chosen, method: str, evaluations: int) -> SelectionResult:
    state = empty_state(ctx)
    gains, values = [], []
    for u in chosen:
        nxt = update_state(state, u, ctx)
        gains.append(nxt.value - state.value)
        values.append(nxt.value)
        state = nxt
    return SelectionResult(
        method=method,
        chosen=tuple(int(u) for u in chosen),
        gains=tuple(gains),
        values=tuple(values),
        final_value=state.value,
        evaluations=evaluations,
    )


def greedy_place(ctx: ObjectiveContext, m: int) -> SelectionResult:
    """Pick m candidates, each round taking the best marginal gain (ties: lowest index)."""
    _check_budget(ctx, m)
    state = empty_state(ctx)
    remaining = list(range(ctx.n_candidates))
    gains, values, chosen = [], [], []
    evaluations = 0
    for _ in range(m):
        best_u, best_gain = -1, -math.inf
        for u in remaining:
            gain = marginal_gain(state, u, ctx)
            evaluations += 1
            if gain > best_gain:
                best_u, best_gain = u, gain
        state = update_state(state, best_u, ctx)
        remaining.remove(best_u)
        chosen.append(best_u)
        gains.append(best_gain)
        values.append(state.value)
    return SelectionResult(
        method="greedy",
        chosen=tuple(chosen),
        gains=tuple(gains),
        values=tuple(values),
        final_value=state.value,
        evaluations=evaluations,
    )


def lazy_greedy_place(ctx: ObjectiveContext, m: int) -> SelectionResult:
    """Greedy via a max-heap of upper bounds; refreshes stale entries before accepting.

    Diminishing returns make cached gains valid upper bounds, so the first
    entry re-evaluated in the current round is the true argmax. Heap keys
    (-gain, index) reproduce greedy's lowest-index tie-breaking.
    """
    _check_budget(ctx, m)
    state = empty_state(ctx)
    evaluations = 0
    heap = []
    for u in range(ctx.n_candidates):
        heap.append((-marginal_gain(state, u, ctx), u, 0))
        evaluations += 1
    heapq.heapify(heap)

    gains, values, chosen = [], [], []
    for round_no in range(m):
        while True:
            neg_gain, u, computed_at = heapq.heappop(heap)
            if computed_at == round_no:
                break
            gain = marginal_gain(state, u, ctx)
            evaluations += 1
            heapq.heappush(heap, (-gain, u, round_no))
        state = update_state(state, u, ctx)
        chosen.append(u)
        gains.append(-neg_gain)
        values.append(state.value)
    return SelectionResult(
        method="lazy-greedy",
        chosen=tuple(chosen),
        gains=tuple(gains),
        values=tuple(values),
        final_value=state.value,
        evaluations=evaluations,
    )


def random_place(ctx: ObjectiveContext, m: int, rng: np.random.Generator) -> SelectionResult:
    """Uniform placement without replacement; the trajectory follows draw order."""
    _check_budget(ctx, m)
    chosen = rng.choice(ctx.n_candidates, size=m, replace=False)
    return _trajectory(ctx, chosen, "random", evaluations=m)


def exhaustive_place(
    ctx: ObjectiveContext, m: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> SelectionResult:
    """Exact maximizer over all m-subsets, lexicographic enumeration, batched log-dets.

    Ties keep the lexicographically smallest index tuple. Refuses instances
    with more than ``cap`` subsets.
    """
    _check_budget(ctx, m)
    n = ctx.n_candidates
    total = math.comb(n, m)
    if total > cap:
        raise InfeasibleError(f"C({n}, {m}) = {total} exceeds the enumeration cap {cap}")

    eye = np.eye(ctx.n_tx, dtype=complex)
    best_value, best_combo = -math.inf, None
    combos = itertools.combinations(range(n), m)
    while True:
        chunk = list(itertools.islice(combos, _EXHAUSTIVE_BATCH))
        if not chunk:
            break
        idx = np.asarray(chunk)
        v = ctx.gram_vectors[idx]  # (batch, m, n_tx)
        rho = ctx.rho[idx]
        grams = eye + np.einsum("bmi,bm,bmj->bij", v, rho, v.conj())
        sign, logabs = np.linalg.slogdet(grams)
        if np.any(sign.real <= 0):
            raise NumericalError("non-positive determinant on a PSD-shifted Gram matrix")
        k = int(np.argmax(logabs))  # first occurrence keeps lex order on ties
        if logabs[k] > best_value:
            best_value, best_combo = float(logabs[k]), chunk[k]
    return _trajectory(ctx, best_combo, "exhaustive", evaluations=total)


def curvature_scan(ctx: ObjectiveContext) -> CurvatureScan:
    """Curvature c = 1 - min_j (f(A) - f(A \\ {j})) / f({j}) over the ground set.

    Candidates whose singleton value is zero (dead channels) are excluded from
    the minimization with a warning; an all-zero instance has no curvature.
    """
    n = ctx.n_candidates
    if n == 0:
        raise ValueError("empty ground set")
    full = list(range(n))
    f_all = objective_value(full, ctx)
    a_full = gram_matrix(full, ctx)

    excluded = tuple(int(j) for j in np.flatnonzero(ctx.rho == 0.0))
    if len(excluded) == n:
        raise ValueError("curvature undefined: every singleton value is zero")
    if excluded:
        warnings.warn(
            f"{len(excluded)} zero-gain candidates excluded from the curvature scan",
            stacklevel=2,
        )

    best_ratio, best_j = math.inf, -1
    for j in full:
        if j in excluded:
            continue
        f_single = objective_value([j], ctx)
        sign, logabs = np.linalg.slogdet(a_full - ctx.gram_increment(j))
        if sign.real <= 0:
            raise NumericalError("leave-one-out Gram matrix lost positive definiteness")
        ratio = (f_all - float(logabs)) / f_single
        if ratio < best_ratio:
            best_ratio, best_j = ratio, j
    c = 1.0 - best_ratio
    if not -_CURVATURE_GUARD <= c <= 1.0 + _CURVATURE_GUARD:
        raise NumericalError(f"curvature {c} outside [0, 1] beyond float noise")
    return CurvatureScan(curvature=min(max(c, 0.0), 1.0), argmin_index=best_j, excluded=excluded)


def curvature(ctx: ObjectiveContext) -> float:
    return curvature_scan(ctx).curvature


def optimality_bound(c: float) -> tuple:
    """Greedy guarantee factors: ((1 - e^-c)/c, 1 - 1/e), with limit 1 at c = 0."""
    if not 0.0 <= c <= 1.0:
        raise ValueError("curvature must lie in [0, 1]")
    tight = 1.0 if c == 0.0 else -math.expm1(-c) / c
    return tight, 1.0 - 1.0 / math.e


def make_certificate(ctx: ObjectiveContext, optimum: Optional[float] = None) -> Certificate:
    c = curvature(ctx)
    tight, loose = optimality_bound(c)
    return Certificate(curvature=c, tight_factor=tight, loose_factor=loose, optimum=optimum)


def check_submodularity(
    ctx: ObjectiveContext, trials: int, rng: np.random.Generator, tolerance: float = 1e-9
) -> SubmodularityReport:
    """Sample random chains S <= T and u outside T; measure monotonicity and
    diminishing-returns margins (positive margin = violation)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = ctx.n_candidates
    worst_mono, worst_sub = -math.inf, -math.inf
    violations = 0
    for _ in range(trials):
        u = int(rng.integers(n))
        in_t = rng.random(n) < 0.5
        in_t[u] = False
        in_s = in_t & (rng.random(n) < 0.5)
        t_set = [int(i) for i in np.flatnonzero(in_t)]
        s_set = [int(i) for i in np.flatnonzero(in_s)]
        extra = [int(i) for i in np.flatnonzero(rng.random(n) < 0.5)]

        f_s = objective_value(s_set, ctx)
        f_t = objective_value(t_set, ctx)
        f_s_union = objective_value(sorted(set(s_set) | set(extra)), ctx)
        gain_s = objective_value(sorted(s_set + [u]), ctx) - f_s
        gain_t = objective_value(sorted(t_set + [u]), ctx) - f_t

        mono_margin = f_s - f_s_union
        sub_margin = gain_t - gain_s
        worst_mono = max(worst_mono, mono_margin)
        worst_sub = max(worst_sub, sub_margin)
        if mono_margin > tolerance or sub_margin > tolerance:
            violations += 1
    return SubmodularityReport(
        trials=trials,
        tolerance=tolerance,
        worst_monotonicity_margin=worst_mono,
        worst_submodularity_margin=worst_sub,
        violation_count=violations,
    )
