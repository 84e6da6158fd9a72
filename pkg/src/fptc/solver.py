"""Leader/radius guessing with fictitious facilities.

A guess fixes a multiset of leader clients and one radius level per leader.
Each (leader, level) pair selects the facilities whose rounded distance to
the leader equals that radius; those candidate parts plus one fictitious
facility per part turn the clustering problem into maximizing a monotone
submodular ``improv`` function under a one-per-part constraint.

Many guesses produce the same multiset of parts, so the search runs once per
distinct part multiset.  Part multisets are visited in order of a cheap lower
bound on any solution they can produce; once that bound reaches the
incumbent cost, nothing later can strictly improve on it.
"""
from __future__ import annotations

import dataclasses
import heapq
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, InstanceError, TooLargeError
from .metric import (MetricInstance, MetricReport, Solution, assign, cost, make_solution,
                     radius_level, rescale_min_distance, subsets_cost_table, validate_metric)
from .submodular import (FacilityLocationObjective, Matroid, PartitionConstraint, best_of_candidates,
                         boost_best_of, check_submodular, continuous_greedy_max, greedy_extend,
                         greedy_matroid_max, max_common_independent, two_matroid_local_search)

DEFAULT_BUDGET = 10**9
TABLE_LIMIT = 16  # facility count up to which subset-cost tables are built
ZERO_LEVEL = -1
COST_RTOL = 1e-9


# ------------------------------------------------------------------ guesses

@dataclass(frozen=True)
class GuessContext:
    leaders: tuple
    levels: tuple
    epsilon: float

    def __post_init__(self):
        if len(self.leaders) != len(self.levels):
            raise ValueError("one radius level per leader")
        if any(m < ZERO_LEVEL for m in self.levels):
            raise ValueError("radius levels must be >= 0 (or the zero level)")

    @property
    def radii(self) -> tuple:
        return tuple(level_radius(m, self.epsilon) for m in self.levels)


def level_radius(m: int, epsilon: float) -> float:
    return 0.0 if m == ZERO_LEVEL else (1.0 + epsilon) ** m


def radius_levels(delta_ratio: float, epsilon: float, zero_level: bool = False) -> list:
    """Levels 0..m with (1+eps)^m the rounded-up aspect ratio, plus the zero level."""
    top = radius_level(max(float(delta_ratio), 1.0), epsilon)
    return ([ZERO_LEVEL] if zero_level else []) + list(range(top + 1))


def count_guesses(n_clients: int, k: int, n_levels: int) -> int:
    return math.comb(n_clients + k - 1, k) * n_levels ** k


def _check_budget(count, budget):
    if budget is not None and count > budget:
        raise BudgetExceeded("guess budget exceeded", count)


def enumerate_guesses(clients, k: int, epsilon: float, delta_ratio: float, zero_level: bool = False,
                      budget: float | None = DEFAULT_BUDGET) -> Iterator[GuessContext]:
    """Every (leader multiset, radius vector) pair once, in lexicographic order."""
    ids = sorted(int(c) for c in getattr(clients, "ids", clients))
    if not ids:
        raise InstanceError("no clients to lead")
    levels = radius_levels(delta_ratio, epsilon, zero_level)
    _check_budget(count_guesses(len(ids), k, len(levels)), budget)
    for leaders in itertools.combinations_with_replacement(ids, k):
        for lv in itertools.product(levels, repeat=k):
            yield GuessContext(leaders, lv, epsilon)


def level_matrix(d, epsilon: float) -> np.ndarray:
    """Vectorized ``radius_level`` with ZERO_LEVEL for zero distances."""
    d = np.asarray(d, dtype=float)
    out = np.full(d.shape, ZERO_LEVEL, dtype=np.int64)
    pos = d > 0
    vals = d[pos]
    base = 1.0 + epsilon
    m = np.ceil(np.log(vals) / math.log(base)).astype(np.int64)
    while True:
        low = base ** m.astype(float) < vals
        if not low.any():
            break
        m[low] += 1
    while True:
        high = base ** (m - 1).astype(float) >= vals
        if not high.any():
            break
        m[high] -= 1
    out[pos] = m
    return out


# -------------------------------------------------------------- extensions

class FictitiousExtension:
    """Candidate parts, their fictitious facilities and the extended metric.

    Facility copies are ``(facility id, part index)`` pairs ordered by part
    then id; element ``e`` of the submodular ground set is ``copies[e]``.
    Empty parts are dropped.
    """

    def __init__(self, instance: MetricInstance, parts: Sequence[Iterable[int]], radii: Sequence[float]):
        kept = [(sorted(int(f) for f in p), float(r)) for p, r in zip(parts, radii) if len(p)]
        self.instance = instance
        self.parts = [p for p, _ in kept]
        self.radii = np.array([r for _, r in kept], dtype=float)
        self.copies = [(f, i) for i, p in enumerate(self.parts) for f in p]
        self.originals = np.array([f for f, _ in self.copies], dtype=np.int64)
        d = instance.distances
        # d(f'_i, v) = 2 R_i + min_{f in F_i} d(f, v)
        self.fictitious = np.array([2 * r + d[p].min(axis=0) for p, r in zip(self.parts, self.radii)])
        self.fictitious = self.fictitious.reshape(len(self.parts), instance.n)
        self._objective = None

    @property
    def k(self) -> int:
        return len(self.parts)

    def between_fictitious(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(2 * self.radii[i] + self.fictitious[j, self.parts[i]].min())

    def extended_matrix(self) -> np.ndarray:
        """Distances over V followed by one row per fictitious facility."""
        n, k = self.instance.n, self.k
        out = np.zeros((n + k, n + k))
        out[:n, :n] = self.instance.distances
        out[n:, :n] = self.fictitious
        out[:n, n:] = self.fictitious.T
        for i in range(k):
            for j in range(k):
                out[n + i, n + j] = self.between_fictitious(i, j)
        return out

    def fictitious_cost(self) -> float:
        """cost(C, F') in the extended metric."""
        inst = self.instance
        near = self.fictitious[:, inst.clients].min(axis=0)
        return float(np.dot(inst.weights, near ** inst.power))

    def objective(self) -> FacilityLocationObjective:
        if self._objective is None:
            inst = self.instance
            D = inst.distances[np.ix_(self.originals, inst.clients)] ** inst.power
            base = self.fictitious[:, inst.clients].min(axis=0) ** inst.power
            self._objective = FacilityLocationObjective(D, base, inst.weights)
        return self._objective

    def constraint(self) -> PartitionConstraint:
        parts, e = [], 0
        for p in self.parts:
            parts.append(range(e, e + len(p)))
            e += len(p)
        return PartitionConstraint(parts)

    def to_originals(self, S) -> list:
        return sorted({int(self.originals[e]) for e in S})

    def cost_with_fictitious(self, S) -> float:
        """cost(C, S ∪ F') for a set of copies S."""
        f = self.objective()
        cur = f.current(np.isin(np.arange(f.n), list(S))[None, :])[0]
        return float(np.dot(f.w, cur))


def build_extension(instance: MetricInstance, guess: GuessContext) -> FictitiousExtension:
    """Parts F_i = {f : rounded d(f, l_i) == R_i} and their fictitious facilities."""
    fac = instance.facilities
    lv = level_matrix(instance.distances[np.ix_(list(guess.leaders), fac)], guess.epsilon)
    parts = [fac[lv[i] == m] for i, m in enumerate(guess.levels)]
    return FictitiousExtension(instance, parts, guess.radii)


def improv(ext: FictitiousExtension, S) -> float:
    """cost(C, F') - cost(C, S ∪ F')."""
    return ext.objective()(S)


def reconstruct_solution(instance: MetricInstance, S, ext: FictitiousExtension, **extra) -> Solution:
    return make_solution(instance, ext.to_originals(S), **extra)


# ------------------------------------------------------------ reference guess

@dataclass
class OptimalReference:
    """Leaders and radii induced by a (typically brute-force optimal) facility set."""
    facilities: tuple
    clusters: tuple
    leaders: tuple
    leader_distances: tuple

    @classmethod
    def from_facilities(cls, instance: MetricInstance, F) -> "OptimalReference":
        where, _ = assign(instance, F)
        fs, clusters, leaders, dists = [], [], [], []
        for f in sorted(set(int(f) for f in F)):
            members = instance.clients[where == f]
            if len(members) == 0:
                continue
            dj = instance.distances[f, members]
            lead = int(members[np.flatnonzero(dj == dj.min()).min()])
            fs.append(f)
            clusters.append(tuple(int(c) for c in members))
            leaders.append(lead)
            dists.append(float(instance.distances[f, lead]))
        return cls(tuple(fs), tuple(clusters), tuple(leaders), tuple(dists))

    def guess(self, epsilon: float) -> GuessContext:
        lv = level_matrix(np.array(self.leader_distances), epsilon)
        pairs = sorted(zip(self.leaders, (int(m) for m in lv)))
        return GuessContext(tuple(l for l, _ in pairs), tuple(m for _, m in pairs), epsilon)


# ------------------------------------------------------------------ search

@dataclass
class _Part:
    facilities: tuple   # original facility ids
    level: int
    radius: float
    positions: tuple    # indices into instance.facilities
    near_p: np.ndarray  # per-client min_{f in part} d(f, j)^p


class GuessSearch:
    """Distinct part multisets for a leader count, visited in lower-bound order."""

    def __init__(self, instance: MetricInstance, epsilon: float, budget=DEFAULT_BUDGET):
        if not 0 < epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if len(instance.clients) == 0:
            raise InstanceError("instance has no clients")
        self.original = instance
        self.instance, self.scale = rescale_min_distance(instance)
        self.epsilon = epsilon
        self.budget = budget
        inst = self.instance
        fac = inst.facilities
        pos_of = {int(f): i for i, f in enumerate(fac)}
        lv = level_matrix(inst.distances[np.ix_(inst.clients, fac)], epsilon)
        self.levels = radius_levels(inst.distances.max(), epsilon, bool((lv == ZERO_LEVEL).any()))
        dp = inst.distances[np.ix_(fac, inst.clients)] ** inst.power
        parts: dict = {}
        for row in lv:
            for m in self.levels:
                members = tuple(int(f) for f in fac[row == m])
                if members and (members, m) not in parts:
                    pos = tuple(pos_of[f] for f in members)
                    parts[(members, m)] = _Part(members, m, level_radius(m, epsilon), pos,
                                                dp[list(pos)].min(axis=0))
        self.parts = sorted(parts.values(), key=lambda p: (p.level, p.facilities))
        # a (leader, level) pair with no facility lets a guess use fewer parts
        self.has_empty = any(not (row == m).any() for row in lv for m in self.levels)
        self.table = subsets_cost_table(inst) if len(fac) <= TABLE_LIMIT else None

    def guess_count(self, n_leaders: int) -> int:
        return count_guesses(len(self.instance.clients), n_leaders, len(self.levels))

    def check_budget(self, n_leaders: int) -> int:
        count = self.guess_count(n_leaders)
        _check_budget(count, self.budget)
        return count

    def multisets(self, sizes: Iterable[int]) -> np.ndarray:
        rows = [list(c) + [-1] * (max(sizes) - s)
                for s in sizes for c in itertools.combinations_with_replacement(range(len(self.parts)), s)]
        return np.array(rows, dtype=np.int64).reshape(len(rows), max(sizes))

    def union_bound(self, subs: np.ndarray) -> np.ndarray:
        """Cost of the union of each multiset's parts (padding entries are -1)."""
        near = np.vstack([p.near_p for p in self.parts] + [np.full(len(self.instance.clients), np.inf)])
        w = self.instance.weights
        out = np.empty(len(subs))
        for lo in range(0, len(subs), 20000):
            block = subs[lo:lo + 20000]
            out[lo:lo + len(block)] = near[block].min(axis=1) @ w
        return out

    def union_mask(self, sub) -> int:
        m = 0
        for i in sub:
            for q in self.parts[i].positions:
                m |= 1 << q
        return m

    def selection_bound(self, sub) -> float:
        """Cheapest one-per-part selection (exact when a subset table exists)."""
        if self.table is None:
            return -math.inf
        masks = np.zeros(1, dtype=np.int64)
        for i in sub:
            bits = np.array([1 << q for q in self.parts[i].positions], dtype=np.int64)
            masks = (masks[:, None] | bits[None, :]).ravel()
        return float(self.table[masks].min())

    def extension(self, sub) -> FictitiousExtension:
        return FictitiousExtension(self.instance, [self.parts[i].facilities for i in sub],
                                   [self.parts[i].radius for i in sub])

    def run(self, subs: np.ndarray, lower: np.ndarray, refine: Callable, solve: Callable,
            prune: bool = True, threads: int = 1):
        """Min-cost result over ``subs``, visited in (refined bound, index) order.

        ``lower`` must not exceed ``refine``, and neither may exceed the cost
        ``solve`` returns.  Bounds are refined lazily: a popped entry holding
        only its cheap bound is pushed back with the refined one.  The first
        strict improvement wins, so results do not depend on pruning or on
        the thread count.  Costs within COST_RTOL count as ties: bounds from
        the subset table and direct costs sum in different orders.
        """
        heap = [(float(lb), i, False) for i, lb in enumerate(lower)]
        heapq.heapify(heap)
        best = None
        stats = {"subproblems": len(subs), "refined": 0, "solved": 0}
        pool = ThreadPoolExecutor(threads) if threads > 1 else None
        try:
            while heap:
                chunk = []
                while heap and len(chunk) < threads:
                    key, idx, fresh = heap[0]
                    if prune and best is not None and key >= best[0] * (1 - COST_RTOL):
                        heap = []
                        break
                    heapq.heappop(heap)
                    sub = tuple(int(i) for i in subs[idx] if i >= 0)
                    if not fresh:
                        stats["refined"] += 1
                        heapq.heappush(heap, (max(key, refine(sub)), idx, True))
                        continue
                    chunk.append((idx, sub))
                results = pool.map(lambda t: solve(*t), chunk) if pool else [solve(*t) for t in chunk]
                for res in results:
                    stats["solved"] += 1
                    if res is not None and (best is None or res[0] < best[0] * (1 - COST_RTOL)):
                        best = res
        finally:
            if pool:
                pool.shutdown()
        return best, stats


def _sub_seed(seed, sub) -> int:
    return int(np.random.SeedSequence([int(seed), len(sub), *sub]).generate_state(1)[0])


def _maximize(f, pc, maximizer, seed, steps, samples, tau):
    if maximizer == "exact":
        return list(best_of_candidates(f, itertools.product(*pc.parts), f.n, None)[0])
    if maximizer == "greedy":
        return greedy_matroid_max(f, pc)
    if maximizer == "cg":
        return boost_best_of(lambda s: continuous_greedy_max(f, pc, steps, samples, s), f, tau, seed)
    raise ValueError(f"unknown maximizer {maximizer!r}")


MAXIMIZERS = ("exact", "cg", "greedy")


def find_centers(instance: MetricInstance, epsilon: float = 0.1, maximizer: str = "cg", seed=0, *,
                 steps: int = 100, samples: int = 64, tau: int = 10, budget=DEFAULT_BUDGET,
                 threads: int = 1, prune: bool = True) -> Solution:
    """Best solution over all leader/radius guesses (k-Median, or k-Means per the instance)."""
    if maximizer not in MAXIMIZERS:
        raise ValueError(f"unknown maximizer {maximizer!r}")
    if len(instance.facilities) == 0:
        raise InstanceError("empty facility set")
    search = GuessSearch(instance, epsilon, budget)
    k = instance.k
    count = search.check_budget(k)
    sizes = range(1, k + 1) if search.has_empty else [k]
    subs = search.multisets(sizes)
    lower = search.union_bound(subs)

    def solve(idx, sub):
        ext = search.extension(sub)
        S = _maximize(ext.objective(), ext.constraint(), maximizer, _sub_seed(seed, sub), steps, samples, tau)
        F = ext.to_originals(S)
        return cost(search.instance, F), idx, F

    best, stats = search.run(subs, lower, search.selection_bound, solve, prune, threads)
    stats["maximizer"] = maximizer
    return make_solution(instance, best[2], guesses_evaluated=count, stats=stats)


def solve_kmeans(instance: MetricInstance, epsilon: float = 0.1, maximizer: str = "cg", seed=0, **kw) -> Solution:
    return find_centers(instance.replace(objective="means"), epsilon, maximizer, seed, **kw)


def solve_guess(instance: MetricInstance, guess: GuessContext, maximizer: str = "exact", seed=0,
                steps: int = 100, samples: int = 64, tau: int = 10) -> Solution:
    """Run a single guess on the min-distance-1 rescaling of ``instance``."""
    scaled, _ = rescale_min_distance(instance)
    ext = build_extension(scaled, guess)
    if ext.k == 0:
        raise InstanceError("guess selects no facilities")
    S = _maximize(ext.objective(), ext.constraint(), maximizer, seed, steps, samples, tau)
    return make_solution(instance, ext.to_originals(S))


# ----------------------------------------------------------- matroid median

class LiftedMatroid(Matroid):
    """A matroid on facility positions lifted to copies: copies of one facility are parallel."""
    kind = "lifted"

    def __init__(self, base: Matroid, positions: Sequence[int]):
        self.base = base
        self.positions = [int(p) for p in positions]
        self.n = len(self.positions)

    def is_independent(self, S):
        img = [self.positions[e] for e in set(S)]
        return len(img) == len(set(img)) and self.base.is_independent(img)


def _subset_min(values: np.ndarray) -> np.ndarray:
    """h[U] = min over T ⊆ U of values[T] (sum-over-subsets DP)."""
    h = values.copy()
    m = int(len(h)).bit_length() - 1
    idx = np.arange(len(h))
    for b in range(m):
        has = (idx >> b) & 1 == 1
        h[has] = np.minimum(h[has], h[idx[has] ^ (1 << b)])
    return h


def solve_matroid_median(instance: MetricInstance, matroid: Matroid, epsilon: float = 0.1, seed=0, *,
                         inner: str = "local-search", budget=DEFAULT_BUDGET, threads: int = 1,
                         prune: bool = True) -> Solution:
    """Guess rank-many leaders; the open set must be independent in ``matroid``.

    ``matroid`` is indexed by position in ``instance.facilities``.
    """
    if matroid.n != len(instance.facilities):
        raise InstanceError("matroid ground set must match the facility count")
    if inner not in ("exact", "local-search"):
        raise ValueError(f"unknown inner engine {inner!r}")
    search = GuessSearch(instance, epsilon, budget)
    r = matroid.rank
    if r < 1:
        raise InstanceError("infeasible matroid")
    count = search.check_budget(r)
    subs = search.multisets(range(1, r + 1) if search.has_empty else [r])
    lower = search.union_bound(subs)
    pos_of = {int(f): i for i, f in enumerate(instance.facilities)}

    refine = lambda sub: -math.inf
    if search.table is not None:
        m = len(instance.facilities)
        indep = np.array([matroid.is_independent([b for b in range(m) if mask >> b & 1])
                          for mask in range(1 << m)])
        h = _subset_min(np.where(indep, search.table, np.inf))
        refine = lambda sub: float(h[search.union_mask(sub)])

    def solve(idx, sub):
        ext = search.extension(sub)
        pc = ext.constraint()
        lifted = LiftedMatroid(matroid, [pos_of[f] for f in ext.originals])
        if len(max_common_independent(pc, lifted)) < pc.k:
            return None
        f = ext.objective()
        if inner == "exact":
            cands = (c for c in itertools.product(*pc.parts) if lifted.is_independent(c))
            S = list(best_of_candidates(f, cands, f.n, None)[0])
        else:
            S = two_matroid_local_search(f, pc, lifted, epsilon, _sub_seed(seed, sub))
        if not S:
            return None
        F = ext.to_originals(S)
        return cost(search.instance, F), idx, F

    best, stats = search.run(subs, lower, refine, solve, prune, threads)
    if best is None:
        raise InstanceError("infeasible matroid")
    stats["inner"] = inner
    return make_solution(instance, best[2], guesses_evaluated=count, stats=stats)


# -------------------------------------------------------- facility location

@dataclass(frozen=True)
class FLInstance:
    instance: MetricInstance
    opening_cost: float
    k_max: int = 3

    def __post_init__(self):
        if not self.opening_cost > 0:
            raise InstanceError("opening cost must be positive")
        if self.k_max < 1:
            raise InstanceError("empty k sweep")
        if self.instance.objective != "median":
            raise InstanceError("facility location uses the k-Median connection cost")

    def total_cost(self, F) -> float:
        F = list(F)
        return self.opening_cost * len(set(F)) + cost(self.instance, F)


def solve_facility_location(fl: FLInstance, epsilon: float = 0.1, seed=0, *, gamma_max: float | None = None,
                            maximizer: str = "cg", steps: int = 100, samples: int = 64, tau: int = 10,
                            budget=DEFAULT_BUDGET, threads: int = 1, prune: bool = True) -> Solution:
    """Sweep k = 1..k_max and every gamma in [1, gamma_max] with gamma*k integral.

    For a fixed part multiset the bicriteria sets for growing gamma share the
    same base and extend one greedy chain, so every prefix of that chain is
    scored once instead of re-running per gamma.
    """
    instance = fl.instance
    gamma_max = 1.0 / epsilon if gamma_max is None else float(gamma_max)
    if gamma_max < 1:
        raise ValueError("gamma_max must be at least 1")
    search = GuessSearch(instance, epsilon, budget)
    top = min(len(instance.facilities), fl.k_max)
    if top < 1:
        raise InstanceError("empty sweep range")
    count = sum(search.guess_count(k) for k in range(1, top + 1))
    _check_budget(count, budget)
    subs = search.multisets(range(1, top + 1))
    # bounds and comparisons live in the rescaled metric
    open_cost = fl.opening_cost / search.scale
    scaled = dataclasses.replace(fl, instance=search.instance, opening_cost=open_cost)
    lower = search.union_bound(subs) + open_cost

    def extras(s):
        k = top if search.has_empty else s
        return int(math.floor(gamma_max * k + 1e-9)) - k

    refine = lambda sub: -math.inf
    if search.table is not None:
        m = len(instance.facilities)
        sizes = np.array([bin(x).count("1") for x in range(1 << m)])
        fl_table = search.table + open_cost * sizes
        # a multiset of s parts opens at most s + extras(s) facilities
        h = {}
        for s in range(1, top + 1):
            cap = min(s + extras(s), m)
            if cap not in h:
                h[cap] = _subset_min(np.where(sizes <= cap, fl_table, np.inf))
        refine = lambda sub: float(h[min(len(sub) + extras(len(sub)), m)][search.union_mask(sub)])

    def solve(idx, sub):
        ext = search.extension(sub)
        f = ext.objective()
        base = _maximize(f, ext.constraint(), maximizer, _sub_seed(seed, sub), steps, samples, tau)
        chain = greedy_extend(f, base, extras(len(sub)))
        best = None
        for i in range(len(chain) + 1):
            F = ext.to_originals(list(base) + chain[:i])
            total = scaled.total_cost(F)
            if best is None or total < best[0]:
                best = (total, idx, F, i)
        return best

    best, stats = search.run(subs, lower, refine, solve, prune, threads)
    sol = make_solution(instance, best[2], guesses_evaluated=count, stats=stats)
    opening = fl.opening_cost * len(sol.facilities)
    stats.update(extras_used=best[3], opening=opening, connection=sol.cost, gamma_max=gamma_max)
    return dataclasses.replace(sol, cost=opening + sol.cost, objective="facility-location", stats=stats)


# ------------------------------------------------------------------ claims

@dataclass
class ClaimResult:
    name: str
    ok: bool
    detail: str = ""


def verify_claims(instance: MetricInstance, epsilon: float = 0.1, seed=0, samples: int = 100,
                  max_extensions: int = 40, exhaustive_limit: int = 12, oracle_budget: float = 1e6) -> list:
    """Finite checks of the extension properties on one instance.

    Extensions come from the guess induced by the brute-force optimum plus a
    seeded sample of other guesses.  Raises TooLargeError when the optimum
    cannot be enumerated.
    """
    from .baseline import brute_force_opt

    report = validate_metric(instance)
    if not report.valid:
        return [ClaimResult("metricity", False, f"input is not a metric: {report.status} {report.witness}")]
    scaled, _ = rescale_min_distance(instance)
    opt = brute_force_opt(instance, budget=oracle_budget)
    ref = OptimalReference.from_facilities(scaled, opt.facilities)
    ref_guess = ref.guess(epsilon)

    rng = np.random.default_rng(seed)
    lv = level_matrix(scaled.distances[np.ix_(scaled.clients, scaled.facilities)], epsilon)
    exts = [build_extension(scaled, ref_guess)]
    for _ in range(max_extensions - 1):
        k = int(rng.integers(1, instance.k + 1))
        rows = rng.integers(len(scaled.clients), size=k)
        levels = [int(rng.choice(lv[r])) for r in rows]
        g = GuessContext(tuple(int(scaled.clients[r]) for r in rows), tuple(levels), epsilon)
        ext = build_extension(scaled, g)
        if ext.k:
            exts.append(ext)

    results = []
    bad = next(((i, r) for i, e in enumerate(exts)
                for r in [validate_metric(e.extended_matrix(), force=True)] if not r.valid), None)
    results.append(ClaimResult("metricity", bad is None,
                               "" if bad is None else f"extension {bad[0]}: {bad[1].status} {bad[1].witness}"))

    checked, fail = 0, ""
    for i, e in enumerate(exts):
        if e.objective().n <= exhaustive_limit:
            checked += 1
            rep = check_submodular(e.objective(), limit=exhaustive_limit)
            if not rep:
                fail = f"extension {i}: {rep.reason} {rep.witness}"
                break
    results.append(ClaimResult("submodularity", not fail, fail or f"{checked} extensions checked"))

    worst = 0.0
    for e in exts:
        pc = e.constraint()
        for _ in range(samples):
            S = [int(rng.choice(p)) for p in pc.parts]
            true = cost(scaled, e.to_originals(S))
            ext_cost = e.cost_with_fictitious(S)
            worst = max(worst, abs(true - ext_cost) / max(true, 1e-300))
    results.append(ClaimResult("validity", worst <= 1e-9, f"max relative gap {worst:.3g}"))

    bound = (3 + 2 * epsilon) ** instance.power
    opt_scaled = cost(scaled, opt.facilities)
    fc = exts[0].fictitious_cost()
    results.append(ClaimResult("fictitious-bound", fc <= bound * opt_scaled * (1 + 1e-9),
                               f"cost(F')/OPT = {fc / opt_scaled if opt_scaled else 0.0:.6g} <= {bound:.6g}"))
    return results
