"""Metric instances, cost evaluation and aspect-ratio handling."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateMetric, InstanceError

OBJECTIVES = ("median", "means")


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MetricInstance:
    """A weighted k-Median / k-Means instance over a finite metric.

    ``distances`` is the dense (n, n) table; ``clients`` and ``facilities``
    hold point ids and may overlap.  Instances are immutable.
    """

    distances: np.ndarray
    clients: np.ndarray
    weights: np.ndarray
    facilities: np.ndarray
    k: int
    objective: str = "median"

    def __post_init__(self):
        d = _frozen(self.distances, np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InstanceError("distance table must be square")
        n = d.shape[0]
        clients = _frozen(self.clients, np.int64)
        facilities = _frozen(self.facilities, np.int64)
        weights = _frozen(self.weights, np.float64)
        if clients.ndim != 1 or weights.shape != clients.shape:
            raise InstanceError("clients and weights must be 1-d and of equal length")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise InstanceError("client weights must be positive")
        if len(np.unique(clients)) != len(clients):
            raise InstanceError("duplicate client id")
        if len(np.unique(facilities)) != len(facilities):
            raise InstanceError("duplicate facility id")
        for ids in (clients, facilities):
            if len(ids) and (ids.min() < 0 or ids.max() >= n):
                raise InstanceError("point id out of range")
        if int(self.k) < 1:
            raise InstanceError("k must be a positive integer")
        if self.objective not in OBJECTIVES:
            raise InstanceError(f"unknown objective {self.objective!r}")
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "clients", clients)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "facilities", np.sort(facilities))
        object.__setattr__(self, "k", int(self.k))

    @property
    def n(self) -> int:
        return self.distances.shape[0]

    @property
    def power(self) -> int:
        return 1 if self.objective == "median" else 2

    def replace(self, **changes) -> "MetricInstance":
        kw = dict(distances=self.distances, clients=self.clients, weights=self.weights,
                  facilities=self.facilities, k=self.k, objective=self.objective)
        kw.update(changes)
        return MetricInstance(**kw)

    def with_clients(self, ids, weights) -> "MetricInstance":
        return self.replace(clients=ids, weights=weights)

    @classmethod
    def from_coords(cls, coords, clients, facilities, k, weights=None, objective="median"):
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
        diff = coords[:, None, :] - coords[None, :, :]
        d = np.sqrt((diff ** 2).sum(-1))
        if weights is None:
            weights = np.ones(len(clients))
        return cls(d, clients, weights, facilities, k, objective)


@dataclass
class Solution:
    facilities: tuple
    assignment: dict
    cost: float
    objective: str
    guesses_evaluated: int = 0
    ratio_vs_oracle: float | None = None
    stats: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "facilities": [int(f) for f in self.facilities],
            "cost": float(self.cost),
            "objective": self.objective,
            "assignment": [{"client": int(c), "facility": int(f)}
                           for c, f in sorted(self.assignment.items())],
            "guesses_evaluated": int(self.guesses_evaluated),
            "ratio_vs_oracle": None if self.ratio_vs_oracle is None else float(self.ratio_vs_oracle),
        }


@dataclass
class MetricReport:
    status: str  # valid | negative | nonzero-diagonal | asymmetry | triangle | unchecked
    witness: tuple | None = None
    message: str = ""

    @property
    def valid(self) -> bool:
        return self.status == "valid"

    def __bool__(self):
        return self.valid


def _table(obj) -> np.ndarray:
    if isinstance(obj, MetricInstance):
        return obj.distances
    return np.asarray(obj, dtype=np.float64)


def validate_metric(obj, max_n: int = 512, force: bool = False, rtol: float = 1e-9) -> MetricReport:
    """Report the first violated metric axiom, or ``valid``.

    Axioms are checked in the order negativity, diagonal, symmetry,
    triangle inequality; triangle witnesses ``(i, j, l)`` satisfy
    ``d(i, j) > d(i, l) + d(l, j)`` and are the lexicographically first.
    The O(n^3) triangle scan is skipped above ``max_n`` unless ``force``.
    """
    d = _table(obj)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InstanceError("distance table must be square")
    n = d.shape[0]
    tol = rtol * max(1.0, float(np.abs(d).max()) if n else 1.0)
    neg = np.argwhere(d < 0)
    if len(neg):
        i, j = map(int, neg[0])
        return MetricReport("negative", (i, j), f"d({i},{j}) = {d[i, j]} < 0")
    diag = np.flatnonzero(np.diag(d) != 0)
    if len(diag):
        i = int(diag[0])
        return MetricReport("nonzero-diagonal", (i,), f"d({i},{i}) = {d[i, i]} != 0")
    asym = np.argwhere(np.abs(d - d.T) > tol)
    if len(asym):
        i, j = map(int, asym[0])
        return MetricReport("asymmetry", (i, j), f"d({i},{j}) = {d[i, j]} != d({j},{i}) = {d[j, i]}")
    if n > max_n and not force:
        return MetricReport("unchecked", None, f"triangle check skipped for n={n} > {max_n}")
    for i in range(n):
        # via[l, j] = d(i, l) + d(l, j)
        via = d[i][:, None] + d
        bad = d[i][None, :] > via + tol
        if bad.any():
            j, l = map(int, np.argwhere(bad.T)[0])
            return MetricReport("triangle", (i, j, l),
                                f"d({i},{j}) = {d[i, j]} > d({i},{l}) + d({l},{j}) = {d[i, l] + d[l, j]}")
    return MetricReport("valid")


def assign(instance: MetricInstance, F: Iterable[int]):
    """Nearest open facility per client (lowest id on ties) and its distance."""
    F = np.array(sorted(set(int(f) for f in F)), dtype=np.int64)
    if len(F) == 0:
        raise InstanceError("no open facilities")
    sub = instance.distances[np.ix_(F, instance.clients)]
    idx = np.argmin(sub, axis=0)
    return F[idx], sub[idx, np.arange(len(instance.clients))]


def cost(instance: MetricInstance, F: Iterable[int]) -> float:
    F = list(F)
    if not F:
        raise InstanceError("no open facilities")
    fac = set(int(f) for f in instance.facilities)
    if any(int(f) not in fac for f in F):
        raise InstanceError("open set contains a non-facility point")
    _, dist = assign(instance, F)
    return float(np.dot(instance.weights, dist ** instance.power))


def make_solution(instance: MetricInstance, F: Iterable[int], **extra) -> Solution:
    F = tuple(sorted(set(int(f) for f in F)))
    where, dist = assign(instance, F)
    assignment = {int(c): int(f) for c, f in zip(instance.clients, where)}
    total = float(np.dot(instance.weights, dist ** instance.power))
    return Solution(F, assignment, total, instance.objective, **extra)


def aspect_ratio(obj) -> float:
    """max_{x != y} d(x, y) / min_{x != y, d > 0} d(x, y)."""
    d = _table(obj)
    n = d.shape[0]
    if n < 2:
        raise DegenerateMetric("degenerate metric")
    off = d[~np.eye(n, dtype=bool)]
    pos = off[off > 0]
    if len(pos) == 0:
        raise DegenerateMetric("degenerate metric")
    return float(pos.max() / pos.min())


def rescale_min_distance(instance: MetricInstance):
    """Scale distances so the minimum nonzero distance is 1; returns (instance, scale)."""
    d = instance.distances
    n = d.shape[0]
    off = d[~np.eye(n, dtype=bool)]
    pos = off[off > 0]
    if len(pos) == 0:
        return instance, 1.0
    scale = float(pos.min())
    return instance.replace(distances=d / scale), scale


def radius_level(a: float, epsilon: float) -> int:
    """Exponent m of the smallest power (1+epsilon)^m that is >= a."""
    if not a > 0:
        raise ValueError("radius must be positive")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    base = 1.0 + epsilon
    m = math.ceil(math.log(a) / math.log(base))
    while base ** m < a:
        m += 1
    while base ** (m - 1) >= a:
        m -= 1
    return m


def rounded_radius(a: float, epsilon: float) -> float:
    return (1.0 + epsilon) ** radius_level(a, epsilon)


def _distinct_points(d: np.ndarray) -> int:
    n = d.shape[0]
    seen = np.zeros(n, dtype=bool)
    groups = 0
    for i in range(n):
        if not seen[i]:
            groups += 1
            seen |= d[i] == 0
    return groups


def kcenter_radius(instance: MetricInstance) -> float:
    """Radius of a farthest-point k-center solution snapped to facilities.

    Farthest-point seeding over the clients is a 2-approximation; snapping
    each center to its nearest facility keeps the solution feasible for the
    bipartite case.
    """
    d = instance.distances
    C = instance.clients
    centers = [int(C[0])]
    near = d[centers[0], C].copy()
    while len(centers) < min(instance.k, len(C)):
        far = int(np.argmax(near))
        if near[far] == 0:
            break
        centers.append(int(C[far]))
        near = np.minimum(near, d[C[far], C])
    snapped = {int(instance.facilities[np.argmin(d[c, instance.facilities])]) for c in centers}
    return float(d[np.ix_(sorted(snapped), C)].min(axis=0).max())


def opt_estimate(instance: MetricInstance) -> float:
    """Estimate M with OPT <= M (in distance units for k-Means)."""
    r = kcenter_radius(instance)
    mass = max(instance.n, float(instance.weights.sum()))
    if instance.objective == "means":
        return math.sqrt(mass) * r
    return mass * r


def normalize_aspect_ratio(instance: MetricInstance, alpha: float = 1.0) -> MetricInstance:
    """Return an instance with polynomially bounded aspect ratio.

    Edges longer than ``2 * alpha * M`` are shortened to that value, edges
    shorter than ``M / n**3`` are lengthened to it, and the table is closed
    under shortest paths.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    d = instance.distances
    n = instance.n
    aspect_ratio(d)  # raises on degenerate input
    if instance.k > _distinct_points(d):
        raise InstanceError("k exceeds the number of distinct points")
    M = opt_estimate(instance)
    if M == 0:
        return instance
    long_edge = 2 * alpha * M
    short_edge = M / n ** 3
    off = ~np.eye(n, dtype=bool)
    out = d.copy()
    out[off & (d > long_edge)] = long_edge
    out[off & (d < short_edge)] = short_edge
    out = shortest_paths(out)
    return instance.replace(distances=out)


def shortest_paths(d: np.ndarray) -> np.ndarray:
    d = np.array(d, dtype=np.float64, copy=True)
    for m in range(d.shape[0]):
        np.minimum(d, d[:, m:m + 1] + d[m:m + 1, :], out=d)
    return d


# -- serialization ---------------------------------------------------------

def instance_from_dict(data: dict) -> MetricInstance:
    try:
        n = int(data["n"])
        if "distances" in data:
            d = np.asarray(data["distances"], dtype=np.float64)
        elif "coords" in data:
            if data.get("metric", "euclidean") != "euclidean":
                raise InstanceError(f"unsupported metric {data.get('metric')!r}")
            coords = np.asarray(data["coords"], dtype=np.float64)
            diff = coords[:, None, :] - coords[None, :, :]
            d = np.sqrt((diff ** 2).sum(-1))
        else:
            raise InstanceError("instance needs 'distances' or 'coords'")
        if d.shape != (n, n):
            raise InstanceError(f"distance table shape {d.shape} does not match n={n}")
        clients = [int(c["id"]) for c in data["clients"]]
        weights = [float(c.get("weight", 1.0)) for c in data["clients"]]
        return MetricInstance(d, clients, weights, data["facilities"], int(data["k"]),
                              data.get("objective", "median"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed instance: {exc}") from exc


def instance_to_dict(instance: MetricInstance) -> dict:
    return {
        "n": instance.n,
        "distances": instance.distances.tolist(),
        "clients": [{"id": int(c), "weight": float(w)}
                    for c, w in zip(instance.clients, instance.weights)],
        "facilities": [int(f) for f in instance.facilities],
        "k": instance.k,
        "objective": instance.objective,
    }


def load_instance(path) -> MetricInstance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(data)


def random_instance(seed, n_clients: int = 8, n_facilities: int = 8, k: int = 2,
                    objective: str = "median", overlap: int = 0, clusters: int = 0,
                    weighted: bool = False) -> MetricInstance:
    """Random Euclidean instance in the unit square.

    Facilities are points ``0..n_facilities-1``; the last ``overlap`` of them
    are also clients.  With ``clusters > 0`` points are drawn around that
    many random centers.
    """
    rng = np.random.default_rng(seed)
    n = n_clients + n_facilities - overlap
    if clusters > 0:
        centers = rng.random((clusters, 2))
        pts = centers[rng.integers(0, clusters, n)] + 0.06 * rng.standard_normal((n, 2))
    else:
        pts = rng.random((n, 2))
    facilities = np.arange(n_facilities)
    clients = np.arange(n_facilities - overlap, n)
    weights = rng.integers(1, 6, len(clients)).astype(float) if weighted else None
    return MetricInstance.from_coords(pts, clients, facilities, k, weights, objective)


def subsets_cost_table(instance: MetricInstance, facilities: Sequence[int] | None = None) -> np.ndarray:
    """Cost of every subset of ``facilities`` indexed by bitmask (bit i = facilities[i]).

    Entry 0 is +inf.
    """
    fac = instance.facilities if facilities is None else np.asarray(facilities)
    m = len(fac)
    dp = instance.distances[np.ix_(fac, instance.clients)] ** instance.power
    mins = np.empty((1 << m, len(instance.clients)))
    mins[0] = np.inf
    for mask in range(1, 1 << m):
        low = (mask & -mask).bit_length() - 1
        np.minimum(mins[mask & (mask - 1)], dp[low], out=mins[mask])
    out = mins @ instance.weights
    out[0] = np.inf
    return out
