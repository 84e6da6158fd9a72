"""Exact enumeration oracles and the coreset-enumeration baseline for C ⊆ F."""
from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np

from .coreset import CoresetParams, build_coreset
from .errors import BudgetExceeded, InstanceError
from .metric import MetricInstance, Solution, make_solution
from .submodular import Matroid

VARIANTS = ("median", "means", "matroid", "facility-location")


def _best_subset(instance: MetricInstance, candidates, ids, opening_cost: float = 0.0, chunk: int = 8192):
    """Min-cost subset (as ids) among ``candidates`` given as index tuples into ``ids``.

    Ties go to the lexicographically smallest id tuple.
    """
    ids = np.asarray(ids, dtype=np.int64)
    dp = instance.distances[np.ix_(ids, instance.clients)] ** instance.power
    dp = np.vstack([dp, np.full(len(instance.clients), np.inf)])  # pad row for ragged sizes
    pad = len(ids)
    best = None
    it = iter(candidates)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        width = max(len(c) for c in block)
        arr = np.full((len(block), width), pad, dtype=np.int64)
        for r, c in enumerate(block):
            arr[r, :len(c)] = c
        costs = dp[arr].min(axis=1) @ instance.weights
        if opening_cost:
            costs = costs + opening_cost * np.array([len(c) for c in block])
        lo = costs.min()
        for r in np.flatnonzero(costs == lo):
            key = tuple(int(ids[i]) for i in block[r])
            if best is None or lo < best[0] or (lo == best[0] and key < best[1]):
                best = (float(lo), key)
    return best


def brute_force_opt(instance: MetricInstance, variant: str | None = None, *, matroid: Matroid | None = None,
                    opening_cost: float | None = None, size_cap: int | None = None,
                    budget: float = 1e7) -> Solution:
    """Exact optimum by exhaustive enumeration.

    ``variant`` defaults to the instance objective.  The matroid variant is
    indexed by position in ``instance.facilities`` and enumerates its bases;
    facility location enumerates every nonempty subset up to ``size_cap``.
    """
    variant = variant or instance.objective
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    fac = instance.facilities
    m = len(fac)
    if m == 0:
        raise InstanceError("empty facility set")
    if variant in ("median", "means"):
        inst = instance.replace(objective=variant)
        k = min(instance.k, m)
        count = math.comb(m, k)
        cands = itertools.combinations(range(m), k)
        extra = 0.0
    elif variant == "matroid":
        if matroid is None or matroid.n != m:
            raise InstanceError("matroid ground set must match the facility count")
        inst, r = instance, matroid.rank
        count = math.comb(m, r)
        cands = (c for c in itertools.combinations(range(m), r) if matroid.is_independent(c))
        extra = 0.0
    else:
        if opening_cost is None or opening_cost <= 0:
            raise InstanceError("facility location needs a positive opening cost")
        inst = instance.replace(objective="median")
        cap = m if size_cap is None else min(size_cap, m)
        count = sum(math.comb(m, s) for s in range(1, cap + 1))
        cands = (c for s in range(1, cap + 1) for c in itertools.combinations(range(m), s))
        extra = float(opening_cost)
    if count > budget:
        raise BudgetExceeded("oracle budget exceeded", count)
    best = _best_subset(inst, cands, fac, extra)
    if best is None:
        raise InstanceError("no feasible solution")
    sol = make_solution(inst, best[1])
    if variant == "facility-location":
        sol = dataclasses.replace(sol, cost=best[0], objective="facility-location",
                                  stats={"opening": extra * len(best[1]), "connection": sol.cost})
    return sol


def nonbipartite_solve(instance: MetricInstance, epsilon: float = 0.2, seed=0, *, c: float = 20.0,
                       budget: float = 1e7) -> Solution:
    """Open the best k-subset of coreset clients (every client is also a facility)."""
    if not set(instance.clients.tolist()) <= set(instance.facilities.tolist()):
        raise InstanceError("bipartite instance")
    core = build_coreset(instance, CoresetParams(epsilon=min(epsilon, 0.5), seed=seed, c=c))
    ids = core.ids
    k = min(instance.k, len(ids))
    count = math.comb(len(ids), k)
    if count > budget:
        raise BudgetExceeded("oracle budget exceeded", count)
    best = _best_subset(core.apply(instance), itertools.combinations(range(len(ids)), k), ids)
    return make_solution(instance, best[1], stats={"coreset_size": len(ids), "coreset_cost": best[0]})


def approximation_ratio(sol: Solution, oracle: Solution) -> float:
    if oracle.cost == 0:
        return 1.0 if sol.cost == 0 else math.inf
    return sol.cost / oracle.cost
