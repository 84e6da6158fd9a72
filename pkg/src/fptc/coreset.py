"""Sensitivity-sampling coresets for weighted k-Median / k-Means."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InstanceError
from .metric import MetricInstance, assign


@dataclass(frozen=True, eq=False)
class WeightedClientSet:
    ids: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        w = np.asarray(self.weights, dtype=np.float64)
        if ids.shape != w.shape or ids.ndim != 1:
            raise ValueError("ids and weights must be 1-d and of equal length")
        if np.any(w <= 0):
            raise ValueError("coreset weights must be positive")
        if len(np.unique(ids)) != len(ids):
            raise ValueError("duplicate client id in coreset")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        return (isinstance(other, WeightedClientSet) and np.array_equal(self.ids, other.ids)
                and np.array_equal(self.weights, other.weights))

    @classmethod
    def of(cls, instance: MetricInstance) -> "WeightedClientSet":
        return cls(instance.clients, instance.weights)

    def apply(self, instance: MetricInstance) -> MetricInstance:
        return instance.with_clients(self.ids, self.weights)

    def to_json(self) -> list:
        return [{"id": int(i), "weight": float(w)} for i, w in zip(self.ids, self.weights)]


@dataclass(frozen=True)
class CoresetParams:
    epsilon: float = 0.2
    delta: float = 0.1
    seed: int = 0
    objective: str | None = None  # defaults to the instance objective
    c: float = 20.0

    def __post_init__(self):
        if not 0 < self.epsilon <= 0.5:
            raise ValueError("epsilon must lie in (0, 1/2]")
        if not 0 < self.delta <= 0.5:
            raise ValueError("delta must lie in (0, 1/2]")
        if self.c <= 0:
            raise ValueError("size multiplier c must be positive")
        if self.objective not in (None, "median", "means"):
            raise ValueError(f"unknown objective {self.objective!r}")


def target_size(n: int, k: int, epsilon: float, objective: str = "median", c: float = 20.0) -> int:
    """c * eps^-2 * k * log n for k-Median, eps^-4 for k-Means."""
    power = 2 if objective == "median" else 4
    return max(1, math.ceil(c * epsilon ** -power * k * math.log(max(n, 2))))


def _seed_centers(instance, rng, k, p):
    """D^p seeding over the clients: k picks, first one proportional to weight."""
    d = instance.distances
    C, w = instance.clients, instance.weights
    first = int(rng.choice(len(C), p=w / w.sum()))
    centers = [int(C[first])]
    near = d[C[first], C] ** p
    for _ in range(1, k):
        mass = w * near
        if mass.sum() <= 0:
            break
        nxt = int(rng.choice(len(C), p=mass / mass.sum()))
        centers.append(int(C[nxt]))
        near = np.minimum(near, d[C[nxt], C] ** p)
    return centers


def build_coreset(instance: MetricInstance, params: CoresetParams) -> WeightedClientSet:
    """Sample a weighted client subset preserving clustering costs.

    Sensitivities come from a D^p-seeded reference solution ``B``:
    ``sigma_j = w_j d(j,B)^p / cost_p(B) + w_j / W(cluster of j)``.  Draws
    are with replacement; repeated draws are merged by summing weights.
    """
    if instance.k > len(instance.facilities):
        raise InstanceError("k exceeds the number of facilities")
    objective = params.objective or instance.objective
    p = 1 if objective == "median" else 2
    s = target_size(instance.n, instance.k, params.epsilon, objective, params.c)
    C, w = instance.clients, instance.weights
    if len(C) <= s:
        return WeightedClientSet(C, w)

    rng = np.random.default_rng(params.seed)
    B = _seed_centers(instance, rng, instance.k, p)
    # B consists of client points; assign() only needs a distance table row
    where, dist = assign(instance.replace(facilities=np.union1d(instance.facilities, B)), B)
    dp = dist ** p
    total = float(np.dot(w, dp))
    sigma = np.zeros(len(C))
    if total > 0:
        sigma += w * dp / total
    cluster_mass = {}
    for b, wj in zip(where, w):
        cluster_mass[int(b)] = cluster_mass.get(int(b), 0.0) + wj
    sigma += w / np.array([cluster_mass[int(b)] for b in where])

    prob = sigma / sigma.sum()
    draws = rng.choice(len(C), size=s, replace=True, p=prob)
    scale = sigma.sum() / (s * sigma)
    merged = {}
    for i in draws:
        merged[int(i)] = merged.get(int(i), 0.0) + scale[i] * w[i]
    order = sorted(merged)
    return WeightedClientSet(C[order], [merged[i] for i in order])


def coreset_error(instance: MetricInstance, coreset: WeightedClientSet, F) -> float:
    """Relative cost error |cost_coreset(F) - cost_full(F)| / cost_full(F)."""
    F = list(F)
    if not F:
        raise InstanceError("no open facilities")
    p = instance.power
    _, full_d = assign(instance, F)
    full = float(np.dot(instance.weights, full_d ** p))
    _, core_d = assign(coreset.apply(instance), F)
    core = float(np.dot(coreset.weights, core_d ** p))
    if full == 0:
        return 0.0 if core == 0 else math.inf
    return abs(core - full) / full
