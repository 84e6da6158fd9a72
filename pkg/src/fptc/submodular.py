"""Monotone submodular maximization under matroid constraints.

Objectives operate on a ground set ``0..n-1``.  Besides ``f(S)`` every
objective exposes batched evaluation over boolean membership masks, which
is what the continuous greedy sampler and the exhaustive oracles use.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import TooLargeError


def _mask(n, S):
    m = np.zeros(n, dtype=bool)
    m[list(S)] = True
    return m


class SubmodularObjective:
    """Set function on ``0..n-1``; subclasses override ``values`` or ``evaluate``."""

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("ground set size must be nonnegative")
        self.n = int(n)

    def evaluate(self, S: Sequence[int]) -> float:
        return float(self.values(_mask(self.n, S)[None, :])[0])

    def __call__(self, S: Iterable[int]) -> float:
        return self.evaluate(sorted(set(S)))

    def values(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=bool)
        return np.array([self.evaluate(np.flatnonzero(m)) for m in masks], dtype=float)

    def gains(self, masks: np.ndarray) -> np.ndarray:
        """Marginal gain of each element w.r.t. each mask row, shape (m, n)."""
        masks = np.asarray(masks, dtype=bool)
        base = self.values(masks)
        out = np.zeros(masks.shape, dtype=float)
        for e in range(self.n):
            with_e = masks.copy()
            with_e[:, e] = True
            out[:, e] = self.values(with_e) - base
        out[masks] = 0.0
        return out


class FunctionObjective(SubmodularObjective):
    """Wraps a plain callable taking a sorted tuple of element ids."""

    def __init__(self, n: int, fn: Callable[[tuple], float]):
        super().__init__(n)
        self.fn = fn

    def evaluate(self, S):
        return float(self.fn(tuple(int(e) for e in S)))


class ModularObjective(SubmodularObjective):
    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        if np.any(self.weights < 0):
            raise ValueError("modular weights must be nonnegative")
        super().__init__(len(self.weights))

    def values(self, masks):
        return np.asarray(masks, dtype=float) @ self.weights

    def gains(self, masks):
        masks = np.asarray(masks, dtype=bool)
        return np.where(masks, 0.0, self.weights[None, :])


class CoverageObjective(SubmodularObjective):
    """Weighted coverage: element e covers the universe items in ``sets[e]``."""

    def __init__(self, sets: Sequence[Iterable[int]], item_weights=None, universe: int | None = None):
        sets = [sorted(set(s)) for s in sets]
        if universe is None:
            universe = 1 + max((max(s) for s in sets if s), default=-1)
        super().__init__(len(sets))
        self.cover = np.zeros((len(sets), universe), dtype=bool)
        for e, s in enumerate(sets):
            self.cover[e, s] = True
        self.item_weights = (np.ones(universe) if item_weights is None
                             else np.asarray(item_weights, dtype=float))

    def _covered(self, masks):
        return (np.asarray(masks, dtype=np.int64) @ self.cover.astype(np.int64)) > 0

    def values(self, masks):
        return self._covered(masks) @ self.item_weights

    def gains(self, masks):
        masks = np.asarray(masks, dtype=bool)
        fresh = ~self._covered(masks)
        out = (fresh * self.item_weights) @ self.cover.T.astype(float)
        out[masks] = 0.0
        return out


class FacilityLocationObjective(SubmodularObjective):
    """``f(S) = sum_j w_j (b_j - min(b_j, min_{e in S} D[e, j]))``.

    ``D`` holds per-element service costs and ``b`` the fallback cost of each
    client, so ``f`` is the weighted saving from opening ``S``.
    """

    def __init__(self, D, base, weights=None):
        self.D = np.asarray(D, dtype=float)
        self.base = np.asarray(base, dtype=float)
        if self.D.ndim != 2 or self.D.shape[1] != len(self.base):
            raise ValueError("service cost matrix must be (elements x clients)")
        self.w = np.ones(len(self.base)) if weights is None else np.asarray(weights, dtype=float)
        super().__init__(self.D.shape[0])

    def current(self, masks):
        masks = np.asarray(masks, dtype=bool)
        big = np.where(masks[:, :, None], self.D[None, :, :], np.inf)
        return np.minimum(self.base[None, :], big.min(axis=1) if self.n else self.base[None, :])

    def values(self, masks):
        return (self.base[None, :] - self.current(masks)) @ self.w

    def gains(self, masks):
        masks = np.asarray(masks, dtype=bool)
        cur = self.current(masks)
        drop = np.maximum(cur[:, None, :] - self.D[None, :, :], 0.0)
        out = drop @ self.w
        out[masks] = 0.0
        return out


# ---------------------------------------------------------------- matroids

class Matroid:
    kind = "abstract"
    n: int

    def is_independent(self, S) -> bool:
        raise NotImplementedError

    def can_add(self, S, e) -> bool:
        return e not in S and self.is_independent(set(S) | {e})

    @property
    def rank(self) -> int:
        return len(greedy_matroid_max(ModularObjective(np.ones(self.n)), self))

    def check_axioms(self, limit: int = 12) -> bool:
        """Exhaustive downward-closure and augmentation check."""
        if self.n > limit:
            raise TooLargeError("ground set too large for an axiom check")
        indep = [frozenset(S) for r in range(self.n + 1)
                 for S in itertools.combinations(range(self.n), r) if self.is_independent(S)]
        fam = set(indep)
        if frozenset() not in fam:
            return False
        for S in indep:
            if any(S - {e} not in fam for e in S):
                return False
        for A in indep:
            for B in indep:
                if len(A) < len(B) and not any(A | {e} in fam for e in B - A):
                    return False
        return True


@dataclass(frozen=True)
class PartitionMatroid(Matroid):
    part_of: tuple
    capacity: tuple
    kind = "partition"

    def __post_init__(self):
        object.__setattr__(self, "part_of", tuple(int(p) for p in self.part_of))
        object.__setattr__(self, "capacity", tuple(int(c) for c in self.capacity))
        if any(p < 0 or p >= len(self.capacity) for p in self.part_of):
            raise ValueError("element assigned to an unknown part")
        if any(c < 0 for c in self.capacity):
            raise ValueError("negative part capacity")

    @property
    def n(self):
        return len(self.part_of)

    def is_independent(self, S):
        counts = [0] * len(self.capacity)
        for e in set(S):
            counts[self.part_of[e]] += 1
        return all(c <= cap for c, cap in zip(counts, self.capacity))

    @property
    def rank(self):
        sizes = np.bincount(self.part_of, minlength=len(self.capacity))
        return int(sum(min(s, c) for s, c in zip(sizes, self.capacity)))


class PartitionConstraint(PartitionMatroid):
    """Disjoint nonempty parts covering the ground set, capacity 1 each."""

    def __init__(self, parts: Sequence[Iterable[int]]):
        parts = tuple(tuple(sorted(set(int(e) for e in p))) for p in parts)
        if any(not p for p in parts):
            raise ValueError("partition parts must be nonempty")
        flat = sorted(e for p in parts for e in p)
        if flat != list(range(len(flat))):
            raise ValueError("parts must be disjoint and cover 0..n-1")
        part_of = [0] * len(flat)
        for i, p in enumerate(parts):
            for e in p:
                part_of[e] = i
        super().__init__(tuple(part_of), (1,) * len(parts))
        object.__setattr__(self, "parts", parts)

    @property
    def k(self):
        return len(self.parts)

    def is_selection(self, S) -> bool:
        """Exactly one element from every part."""
        S = set(S)
        return len(S) == self.k and self.is_independent(S)


@dataclass(frozen=True)
class UniformMatroid(Matroid):
    n: int
    r: int
    kind = "uniform"

    def is_independent(self, S):
        S = set(S)
        return len(S) <= self.r and all(0 <= e < self.n for e in S)

    @property
    def rank(self):
        return min(self.r, self.n)


class ExplicitMatroid(Matroid):
    """Matroid given by its list of bases."""
    kind = "explicit"

    def __init__(self, n: int, bases: Iterable[Iterable[int]], check: bool = False):
        self.n = int(n)
        self.bases = sorted({tuple(sorted(set(b))) for b in bases})
        if not self.bases:
            raise ValueError("explicit matroid needs at least one base")
        if len({len(b) for b in self.bases}) != 1:
            raise ValueError("bases must have equal size")
        self._base_sets = [frozenset(b) for b in self.bases]
        if check and not self.check_axioms():
            raise ValueError("bases violate the exchange axiom")

    def is_independent(self, S):
        S = frozenset(S)
        return any(S <= B for B in self._base_sets)

    @property
    def rank(self):
        return len(self.bases[0])

    @classmethod
    def from_gf2(cls, vectors) -> "ExplicitMatroid":
        """Linear matroid of the given 0/1 column vectors over GF(2)."""
        vecs = [int("".join(str(int(b) & 1) for b in v), 2) if len(v) else 0 for v in vectors]
        n = len(vecs)

        def gf2_rank(idx):
            basis = []
            for i in idx:
                x = vecs[i]
                for b in basis:
                    x = min(x, x ^ b)
                if x:
                    basis.append(x)
            return len(basis)

        r = gf2_rank(range(n))
        bases = [c for c in itertools.combinations(range(n), r) if gf2_rank(c) == r]
        return cls(n, bases)

    @classmethod
    def random_linear(cls, n: int, dim: int, seed=0) -> "ExplicitMatroid":
        rng = np.random.default_rng(seed)
        return cls.from_gf2(rng.integers(0, 2, size=(n, dim)))


def max_common_independent(m1: Matroid, m2: Matroid) -> list:
    """Largest common independent set by augmenting paths (exchange graph)."""
    n = m1.n
    current: set = set()
    while True:
        outside = [x for x in range(n) if x not in current]
        sources = {x for x in outside if m1.is_independent(current | {x})}
        sinks = {x for x in outside if m2.is_independent(current | {x})}
        hit = sources & sinks
        if hit:
            current.add(min(hit))
            continue
        adj = {v: [] for v in range(n)}
        for y in sorted(current):
            for x in outside:
                swapped = (current - {y}) | {x}
                if m1.is_independent(swapped):
                    adj[y].append(x)
                if m2.is_independent(swapped):
                    adj[x].append(y)
        prev = {s: None for s in sources}
        queue = sorted(sources)
        end = None
        for v in queue:
            if v in sinks:
                end = v
                break
            for u in adj[v]:
                if u not in prev:
                    prev[u] = v
                    queue.append(u)
        if end is None:
            return sorted(current)
        while end is not None:
            current ^= {end}
            end = prev[end]


# --------------------------------------------------------------- maximizers

def greedy_matroid_max(f: SubmodularObjective, m: Matroid, candidates=None) -> list:
    """Lazy greedy to a base; ties go to the lowest element id."""
    chosen: list = []
    pool = range(f.n) if candidates is None else candidates
    heap = [(-math.inf, e, -1) for e in pool]
    heapq.heapify(heap)
    step = 0
    while heap:
        neg, e, stamp = heapq.heappop(heap)
        if not m.can_add(chosen, e):
            continue  # stays infeasible as the set grows
        if stamp == step:
            chosen.append(e)
            step += 1
            continue
        g = f(chosen + [e]) - f(chosen) if chosen else f([e])
        heapq.heappush(heap, (-g, e, step))
    return sorted(chosen)


def _seed_int(seed) -> int:
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    return int(np.random.default_rng(seed).integers(2**63))


def continuous_greedy_max(f: SubmodularObjective, pc: PartitionConstraint, steps: int = 100,
                          samples: int = 64, seed=0) -> list:
    """Discretized continuous greedy with per-part proportional rounding."""
    if steps < 1 or samples < 1:
        raise ValueError("steps and samples must be positive")
    rng = np.random.default_rng(seed)
    n = f.n
    x = np.zeros(n)
    delta = 1.0 / steps
    parts = [np.asarray(p) for p in pc.parts]
    for _ in range(steps):
        R = rng.random((samples, n)) < x[None, :]
        # E[f(R+e) - f(R)]; gains() reports 0 where e is already in R
        w = f.gains(R).mean(axis=0)
        for p in parts:
            x[p[int(np.argmax(w[p]))]] += delta
    rounded = []
    for p in parts:
        mass = x[p] / x[p].sum()
        rounded.append(int(p[rng.choice(len(p), p=mass)]))
    rounded.sort()
    greedy = greedy_matroid_max(f, pc)
    return greedy if f(greedy) > f(rounded) else rounded


def boost_best_of(run: Callable[[int], list], f: SubmodularObjective, tau: int = 10, seed=0) -> list:
    """Best of ``tau`` runs with derived seeds; earliest run wins ties."""
    if tau < 1:
        raise ValueError("tau must be at least 1")
    if tau == 1:
        return run(seed)
    seeds = np.random.SeedSequence(_seed_int(seed)).generate_state(tau)
    best, best_v = None, -math.inf
    for s in seeds:
        S = run(int(s))
        v = f(S)
        if v > best_v:
            best, best_v = S, v
    return best


def greedy_extend(f: SubmodularObjective, S, count: int, candidates=None) -> list:
    """Order of up to ``count`` unconstrained greedy additions to ``S``."""
    cur = list(S)
    pool = [e for e in (range(f.n) if candidates is None else candidates) if e not in set(cur)]
    added = []
    for _ in range(min(count, len(pool))):
        mask = _mask(f.n, cur)[None, :]
        g = f.gains(mask)[0]
        e = max(pool, key=lambda e: (g[e], -e))
        pool.remove(e)
        cur.append(e)
        added.append(e)
    return added


def bicriteria_max(f: SubmodularObjective, pc: PartitionConstraint, gamma: float, steps: int = 100,
                   samples: int = 64, seed=0) -> list:
    """Continuous-greedy base plus floor(gamma*k) - k greedy extras."""
    if gamma < 1:
        raise ValueError("gamma must be at least 1")
    base = continuous_greedy_max(f, pc, steps, samples, seed)
    extra = int(math.floor(gamma * pc.k + 1e-9)) - pc.k
    return sorted(base + greedy_extend(f, base, extra))


def two_matroid_local_search(f: SubmodularObjective, m1: Matroid, m2: Matroid, epsilon: float = 0.1,
                             seed=0, max_rounds: int = 10_000) -> list:
    """Local search over common independent sets: drop up to 2, add up to 1."""
    n = f.n
    both = _Intersection(m1, m2)
    cur = greedy_matroid_max(f, both)
    value = f(cur)
    threshold = epsilon / max(n, 1) ** 2
    rng = np.random.default_rng(seed)
    for _ in range(max_rounds):
        order = rng.permutation(n).tolist()
        moved = False
        inside = sorted(cur)
        drops = [()] + [(a,) for a in inside] + list(itertools.combinations(inside, 2))
        for add in [None] + [e for e in order if e not in cur]:
            for drop in drops:
                if add is None and drop:
                    continue  # pure deletions never help a monotone f
                cand = set(cur) - set(drop)
                if add is not None:
                    cand.add(add)
                if cand == set(cur) or not both.is_independent(cand):
                    continue
                v = f(cand)
                needed = value * (1 + threshold) if value > 0 else 0.0
                if v > needed:
                    cur, value, moved = sorted(cand), v, True
                    break
            if moved:
                break
        if not moved:
            break
    return cur


class _Intersection(Matroid):
    kind = "intersection"

    def __init__(self, m1, m2):
        if m1.n != m2.n:
            raise ValueError("matroids on different ground sets")
        self.n, self.ms = m1.n, (m1, m2)

    def is_independent(self, S):
        return all(m.is_independent(S) for m in self.ms)


# ----------------------------------------------------------------- oracles

def best_of_candidates(f, cands, n, best, chunk=4096):
    it = iter(cands)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return best
        masks = np.zeros((len(block), n), dtype=bool)
        for r, S in enumerate(block):
            masks[r, list(S)] = True
        vals = f.values(masks)
        for S, v in zip(block, vals):
            key = tuple(sorted(S))
            if best is None or v > best[1] or (v == best[1] and key < best[0]):
                best = (key, float(v))


def brute_force_max(f: SubmodularObjective, constraint=None, size: int | None = None,
                    budget: float = 1e7) -> tuple:
    """Exact maximizer by enumeration; ties go to the lexicographically smallest set.

    ``constraint`` may be a PartitionConstraint (one element per part), a
    single Matroid (bases, or independent sets of ``size``), a pair of
    matroids (all common independent sets) or None (all ``size``-sets).
    """
    n = f.n
    if isinstance(constraint, PartitionConstraint):
        count = math.prod(len(p) for p in constraint.parts)
        cands = itertools.product(*constraint.parts)
    elif isinstance(constraint, Matroid):
        r = constraint.rank if size is None else size
        count = math.comb(n, r)
        cands = (c for c in itertools.combinations(range(n), r) if constraint.is_independent(c))
    elif constraint is not None:
        count = 2 ** n
        ms = list(constraint)
        cands = (c for r in range(n + 1) for c in itertools.combinations(range(n), r)
                 if all(m.is_independent(c) for m in ms))
    else:
        if size is None:
            raise ValueError("unconstrained enumeration needs a size")
        count = math.comb(n, size)
        cands = itertools.combinations(range(n), size)
    if count > budget:
        raise TooLargeError("instance too large for oracle")
    best = best_of_candidates(f, cands, n, None)
    if best is None:
        return [], 0.0
    return list(best[0]), best[1]


@dataclass
class SubmodularityReport:
    ok: bool
    reason: str = ""
    witness: tuple = ()

    def __bool__(self):
        return self.ok


def value_table(f: SubmodularObjective, limit: int = 16) -> np.ndarray:
    """f on every subset, indexed by bitmask."""
    n = f.n
    if n > limit:
        raise TooLargeError("ground set too large for an exhaustive table")
    idx = np.arange(2 ** n)
    masks = ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
    return np.concatenate([f.values(masks[i:i + 4096]) for i in range(0, len(masks), 4096)])


def check_submodular(f: SubmodularObjective, tol: float = 1e-9, limit: int = 12) -> SubmodularityReport:
    """Exhaustive check of f(empty)=0, monotonicity and diminishing returns."""
    t = value_table(f, limit)
    n = f.n
    scale = tol * max(1.0, float(np.abs(t).max()))
    if abs(t[0]) > scale:
        return SubmodularityReport(False, "nonzero at empty set", ())
    idx = np.arange(len(t))
    for x in range(n):
        S = idx[(idx >> x) & 1 == 0]
        gain = t[S | (1 << x)] - t[S]
        bad = np.flatnonzero(gain < -scale)
        if len(bad):
            return SubmodularityReport(False, "not monotone", (int(S[bad[0]]), x))
        for y in range(x + 1, n):
            Sy = S[(S >> y) & 1 == 0]
            lhs = t[Sy | (1 << x)] - t[Sy]
            rhs = t[Sy | (1 << x) | (1 << y)] - t[Sy | (1 << y)]
            bad = np.flatnonzero(rhs > lhs + scale)
            if len(bad):
                return SubmodularityReport(False, "not submodular", (int(Sy[bad[0]]), x, y))
    return SubmodularityReport(True)
