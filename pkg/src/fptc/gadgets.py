"""Label Cover pipelines, hypergrid coverage systems and their k-Median embedding.

Labels and vertices are integers.  Product labels (super-vertices, repeated
games) are mixed-radix encodings with the first coordinate most significant,
so integer order equals lexicographic tuple order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, InstanceError
from .metric import MetricInstance, shortest_paths


def encode(digits: Sequence[int], radix: int) -> int:
    out = 0
    for d in digits:
        out = out * radix + int(d)
    return out


def decode(code: int, radix: int, width: int) -> tuple:
    out = [0] * width
    for t in range(width - 1, -1, -1):
        code, out[t] = divmod(code, radix)
    return tuple(out)


# ------------------------------------------------------------------ 3-SAT

@dataclass(frozen=True)
class ThreeSatFormula:
    """Clauses are triples of nonzero literals; ``+v`` / ``-v`` for variable v-1."""
    n_vars: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for c in clauses:
            if len(c) != 3:
                raise InstanceError("every clause needs exactly 3 literals")
            if any(l == 0 or abs(l) > self.n_vars for l in c):
                raise InstanceError(f"clause {c} mentions an undeclared variable")

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return all(any((assignment[abs(l) - 1] == 1) == (l > 0) for l in c) for c in self.clauses)

    def to_dict(self) -> dict:
        return {"variables": self.n_vars, "clauses": [list(c) for c in self.clauses]}

    @classmethod
    def from_dict(cls, data: dict) -> "ThreeSatFormula":
        try:
            return cls(int(data["variables"]), tuple(tuple(c) for c in data["clauses"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed formula: {exc}") from exc


def random_3sat(n_vars: int, n_clauses: int, seed=0) -> tuple:
    """A formula satisfied by a planted assignment; returns (formula, assignment)."""
    if n_vars < 3:
        raise ValueError("need at least 3 variables")
    rng = np.random.default_rng(seed)
    planted = rng.integers(0, 2, size=n_vars).tolist()
    clauses = []
    while len(clauses) < n_clauses:
        vs = rng.choice(n_vars, size=3, replace=False) + 1
        signs = rng.choice([-1, 1], size=3)
        c = tuple(int(s * v) for s, v in zip(signs, vs))
        if any((planted[abs(l) - 1] == 1) == (l > 0) for l in c):
            clauses.append(c)
    return ThreeSatFormula(n_vars, tuple(clauses)), planted


# ------------------------------------------------------------- label cover

@dataclass(frozen=True)
class LabelCoverInstance:
    n_left: int
    n_right: int
    sigma_u: int
    sigma_v: int
    edges: tuple        # (u, v) pairs; parallel edges allowed
    projections: tuple  # per edge, a length-sigma_u tuple into range(sigma_v)

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        projs = tuple(tuple(int(x) for x in p) for p in self.projections)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "projections", projs)
        if len(edges) != len(projs):
            raise InstanceError("one projection table per edge")
        for (u, v), p in zip(edges, projs):
            if not (0 <= u < self.n_left and 0 <= v < self.n_right):
                raise InstanceError("edge endpoint out of range")
            if len(p) != self.sigma_u or any(not 0 <= x < self.sigma_v for x in p):
                raise InstanceError("projection must be total on the left alphabet")

    def left_degrees(self) -> list:
        deg = [0] * self.n_left
        for u, _ in self.edges:
            deg[u] += 1
        return deg

    def right_degrees(self) -> list:
        deg = [0] * self.n_right
        for _, v in self.edges:
            deg[v] += 1
        return deg

    @property
    def is_u_regular(self) -> bool:
        return len(set(self.left_degrees())) <= 1

    @property
    def d_u(self) -> int | None:
        degs = set(self.left_degrees())
        return degs.pop() if len(degs) == 1 else None

    @property
    def d_v(self) -> int:
        return max(self.right_degrees(), default=0)

    def value(self, left_labels, right_labels) -> Fraction:
        if not self.edges:
            return Fraction(1)
        ok = sum(p[left_labels[u]] == right_labels[v] for (u, v), p in zip(self.edges, self.projections))
        return Fraction(ok, len(self.edges))

    def to_dict(self) -> dict:
        return {"left": self.n_left, "right": self.n_right, "sigma_u": self.sigma_u, "sigma_v": self.sigma_v,
                "edges": [{"u": u, "v": v, "projection": list(p)}
                          for (u, v), p in zip(self.edges, self.projections)]}

    @classmethod
    def from_dict(cls, data: dict) -> "LabelCoverInstance":
        try:
            return cls(int(data["left"]), int(data["right"]), int(data["sigma_u"]), int(data["sigma_v"]),
                       tuple((e["u"], e["v"]) for e in data["edges"]),
                       tuple(tuple(e["projection"]) for e in data["edges"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed label cover instance: {exc}") from exc


def _clause_labels(clause) -> list:
    """Bit triples (one per literal position) satisfying the clause, in lex order."""
    return [bits for bits in itertools.product((0, 1), repeat=3)
            if any(b == (1 if l > 0 else 0) for b, l in zip(bits, clause))]


def clause_variable_game(phi: ThreeSatFormula) -> LabelCoverInstance:
    """Clauses on the left (7 labels), variables on the right (2 labels)."""
    edges, projs = [], []
    for u, clause in enumerate(phi.clauses):
        labels = _clause_labels(clause)
        for pos, lit in enumerate(clause):
            edges.append((u, abs(lit) - 1))
            projs.append(tuple(bits[pos] for bits in labels))
    return LabelCoverInstance(len(phi.clauses), phi.n_vars, 7, 2, tuple(edges), tuple(projs))


def assignment_labeling(phi: ThreeSatFormula, assignment: Sequence[int]) -> tuple:
    """Left/right labels of the clause-variable game induced by an assignment."""
    left = []
    for clause in phi.clauses:
        bits = tuple(int(assignment[abs(l) - 1]) for l in clause)
        labels = _clause_labels(clause)
        if bits not in labels:
            raise ValueError("assignment does not satisfy every clause")
        left.append(labels.index(bits))
    return left, [int(x) for x in assignment]


def label_cover_opt(L: LabelCoverInstance, budget: float = 1e7) -> Fraction:
    """Exact optimum: enumerate left labelings, best right label per vertex."""
    if not L.edges:
        return Fraction(1)
    count = L.sigma_u ** L.n_left
    if count > budget:
        raise BudgetExceeded("label cover enumeration budget exceeded", count)
    us = np.array([u for u, _ in L.edges])
    vs = np.array([v for _, v in L.edges])
    P = np.array(L.projections)
    inc = np.zeros((len(L.edges), L.n_right))
    inc[np.arange(len(L.edges)), vs] = 1
    best = 0
    it = itertools.product(range(L.sigma_u), repeat=L.n_left)
    while True:
        block = np.array(list(itertools.islice(it, 20000)), dtype=np.int64)
        if not len(block):
            break
        proj = P[np.arange(len(L.edges))[None, :], block[:, us]]
        per_label = np.stack([(proj == l) @ inc for l in range(L.sigma_v)])
        best = max(best, int(per_label.max(axis=0).sum(axis=1).max()))
        if best == len(L.edges):
            break
    return Fraction(best, len(L.edges))


def merge_supervertices(L: LabelCoverInstance, ell: int) -> LabelCoverInstance:
    """Pad U with copies of vertex 0 to a multiple of ``ell`` and merge groups in id order."""
    if ell < 1 or ell > L.n_left:
        raise InstanceError("group count must lie in 1..|U|")
    pad = (-L.n_left) % ell
    edges, projs = list(L.edges), list(L.projections)
    for c in range(pad):
        for (u, v), p in zip(L.edges, L.projections):
            if u == 0:
                edges.append((L.n_left + c, v))
                projs.append(p)
    size = (L.n_left + pad) // ell
    sigma = L.sigma_u ** size
    new_edges, new_projs = [], []
    for (u, v), p in zip(edges, projs):
        group, j = divmod(u, size)
        new_edges.append((group, v))
        new_projs.append(tuple(p[decode(code, L.sigma_u, size)[j]] for code in range(sigma)))
    return LabelCoverInstance(ell, L.n_right, sigma, L.sigma_v, tuple(new_edges), tuple(new_projs))


def merge_labeling(L: LabelCoverInstance, left_labels: Sequence[int], ell: int) -> list:
    labels = list(left_labels) + [left_labels[0]] * ((-L.n_left) % ell)
    size = len(labels) // ell
    return [encode(labels[g * size:(g + 1) * size], L.sigma_u) for g in range(ell)]


def parallel_repetition(L: LabelCoverInstance, r: int, budget: float = 1e6) -> LabelCoverInstance:
    """r-fold product game with coordinatewise projections."""
    if r < 1:
        raise ValueError("r must be at least 1")
    cost = len(L.edges) ** r * L.sigma_u ** r
    if cost > budget:
        raise BudgetExceeded("parallel repetition budget exceeded", cost)
    su, sv = L.sigma_u ** r, L.sigma_v ** r
    edges, projs = [], []
    for combo in itertools.product(range(len(L.edges)), repeat=r):
        u = encode([L.edges[e][0] for e in combo], L.n_left)
        v = encode([L.edges[e][1] for e in combo], L.n_right)
        table = []
        for code in range(su):
            digits = decode(code, L.sigma_u, r)
            table.append(encode([L.projections[e][d] for e, d in zip(combo, digits)], L.sigma_v))
        edges.append((u, v))
        projs.append(tuple(table))
    return LabelCoverInstance(L.n_left ** r, L.n_right ** r, su, sv, tuple(edges), tuple(projs))


def repeat_labeling(L: LabelCoverInstance, left_labels, right_labels, r: int) -> tuple:
    left = [encode([left_labels[u] for u in decode(x, L.n_left, r)], L.sigma_u) for x in range(L.n_left ** r)]
    right = [encode([right_labels[v] for v in decode(y, L.n_right, r)], L.sigma_v) for y in range(L.n_right ** r)]
    return left, right


# ------------------------------------------------------------- set systems

@dataclass
class SetSystem:
    weights: list          # per element, positive
    sets: list             # element id lists
    k: int

    def __post_init__(self):
        self.sets = [sorted(set(int(e) for e in s)) for s in self.sets]
        if any(not w > 0 for w in self.weights):
            raise InstanceError("element weights must be positive")
        if any(e < 0 or e >= len(self.weights) for s in self.sets for e in s):
            raise InstanceError("set references a missing element")
        if self.k > len(self.sets):
            raise InstanceError("budget k exceeds the family size")

    def total_weight(self):
        return sum(self.weights, Fraction(0) if self.weights and isinstance(self.weights[0], Fraction) else 0.0)

    def covered_weight(self, chosen):
        items = set().union(*(self.sets[i] for i in chosen)) if chosen else set()
        return sum((self.weights[e] for e in sorted(items)), 0 * self.weights[0] if self.weights else 0)

    def coverage_fraction(self, chosen):
        return self.covered_weight(chosen) / self.total_weight()

    def to_dict(self) -> dict:
        return {"elements": [{"id": i, "weight": float(w)} for i, w in enumerate(self.weights)],
                "sets": [list(s) for s in self.sets], "k": self.k}

    @classmethod
    def from_dict(cls, data: dict) -> "SetSystem":
        try:
            elems = sorted(data["elements"], key=lambda e: e["id"])
            if [e["id"] for e in elems] != list(range(len(elems))):
                raise ValueError("element ids must be 0..n-1")
            return cls([float(e["weight"]) for e in elems], [list(s) for s in data["sets"]], int(data["k"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed set system: {exc}") from exc


@dataclass
class HypergridSystem:
    """Weighted hypergrid coverage built from a U-regular Label Cover instance.

    Sets are indexed ``(j * |U| + u) * |Sigma_U| + label`` for slice index j,
    left vertex u and left label.  Hypergrid (v, i) lives at right vertex v
    and index tuple i into v's incident edges.
    """
    game: LabelCoverInstance
    a: int
    incident: list = field(init=False)   # per right vertex, its edge ids in order

    def __post_init__(self):
        L = self.game
        if self.a < 1:
            raise ValueError("a must be at least 1")
        if not L.is_u_regular:
            raise InstanceError("hypergrid construction needs a U-regular game")
        self.incident = [[] for _ in range(L.n_right)]
        for e, (_, v) in enumerate(L.edges):
            self.incident[v].append(e)

    @property
    def k(self) -> int:
        return self.a * self.game.n_left

    @property
    def n_sets(self) -> int:
        return self.a * self.game.n_left * self.game.sigma_u

    def set_key(self, sid: int) -> tuple:
        ju, label = divmod(sid, self.game.sigma_u)
        j, u = divmod(ju, self.game.n_left)
        return j, u, label

    def set_id(self, j: int, u: int, label: int) -> int:
        return (j * self.game.n_left + u) * self.game.sigma_u + label

    def grid_weight(self, v: int) -> Fraction:
        return Fraction(1, len(self.incident[v]) ** (self.a - 1) * len(self.game.edges))

    def grids(self):
        for v, inc in enumerate(self.incident):
            for i in itertools.product(range(len(inc)), repeat=self.a):
                yield v, i

    def n_grids(self) -> int:
        return sum(len(inc) ** self.a for inc in self.incident)

    def total_grid_weight(self) -> Fraction:
        return sum((len(inc) ** self.a * self.grid_weight(v) for v, inc in enumerate(self.incident) if inc),
                   Fraction(0))

    def total_weight(self) -> Fraction:
        return self.total_grid_weight() * self.a ** self.game.sigma_v

    def slice_in(self, sid: int, v: int, i: tuple):
        """(coordinate, value) of the slice set ``sid`` covers in grid (v, i), or None."""
        j, u, label = self.set_key(sid)
        e = self.incident[v][i[j]]
        if self.game.edges[e][0] != u:
            return None
        return self.game.projections[e][label], j

    def coverage_fraction(self, chosen) -> Fraction:
        """Covered weight over total weight, counted per hypergrid without materializing."""
        chosen = sorted(set(chosen))
        total = Fraction(0)
        for v, i in self.grids():
            per_coord: dict = {}
            for sid in chosen:
                hit = self.slice_in(sid, v, i)
                if hit is not None:
                    per_coord.setdefault(hit[0], set()).add(hit[1])
            miss = Fraction(1)
            for values in per_coord.values():
                miss *= Fraction(self.a - len(values), self.a)
            total += self.grid_weight(v) * (1 - miss)
        return total / self.total_grid_weight()

    def labeling_sets(self, left_labels) -> list:
        return sorted(self.set_id(j, u, left_labels[u]) for j in range(self.a) for u in range(self.game.n_left))

    def materialize(self, budget: float = 1e6) -> SetSystem:
        """Explicit universe, element ids in (v, i, x) lexicographic order."""
        cells = self.a ** self.game.sigma_v
        size = self.n_grids() * cells
        if size > budget:
            raise BudgetExceeded("hypergrid universe budget exceeded", size)
        weights, sets = [], [[] for _ in range(self.n_sets)]
        xs = list(itertools.product(range(self.a), repeat=self.game.sigma_v))
        base = 0
        for v, i in self.grids():
            weights.extend([self.grid_weight(v)] * cells)
            for sid in range(self.n_sets):
                hit = self.slice_in(sid, v, i)
                if hit is not None:
                    c, j = hit
                    sets[sid].extend(base + t for t, x in enumerate(xs) if x[c] == j)
            base += cells
        return SetSystem(weights, sets, self.k)


def hypergrid_coverage(L: LabelCoverInstance, a: int, budget: float = 1e6) -> HypergridSystem:
    system = HypergridSystem(L, a)
    if system.n_grids() > budget:
        raise BudgetExceeded("hypergrid count budget exceeded", system.n_grids())
    return system


def coverage_fraction(S, chosen):
    return S.coverage_fraction(chosen)


def greedy_max_coverage(S: SetSystem) -> tuple:
    """k rounds of max marginal covered weight; ties go to the lowest set id."""
    covered: set = set()
    chosen = []
    for _ in range(S.k):
        best, best_gain = None, None
        for sid, s in enumerate(S.sets):
            if sid in chosen:
                continue
            gain = sum(S.weights[e] for e in s if e not in covered)
            if best is None or gain > best_gain:
                best, best_gain = sid, gain
        if best is None:
            break
        chosen.append(best)
        covered.update(S.sets[best])
    return sorted(chosen), S.covered_weight(chosen)


def coverage_to_kmedian(S: SetSystem) -> MetricInstance:
    """Sets become facilities, elements weighted clients; distances are membership-graph hops."""
    m, u = len(S.sets), len(S.weights)
    if m == 0:
        raise InstanceError("empty set family")
    n = m + u
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for sid, s in enumerate(S.sets):
        for e in s:
            d[sid, m + e] = d[m + e, sid] = 1.0
    d = shortest_paths(d)
    finite = d[np.isfinite(d)]
    diam = float(finite.max()) if len(finite) else 0.0
    d[~np.isfinite(d)] = 2 * diam + 1  # disconnected pairs
    return MetricInstance(d, np.arange(m, n), [float(w) for w in S.weights], np.arange(m), max(1, S.k))
