import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fptc.errors import DegenerateMetric, InstanceError
from fptc.metric import (MetricInstance, aspect_ratio, assign, cost, instance_from_dict, instance_to_dict,
                         kcenter_radius, load_instance, make_solution, normalize_aspect_ratio, radius_level,
                         random_instance, rescale_min_distance, rounded_radius, shortest_paths,
                         subsets_cost_table, validate_metric)


def line(points, clients=None, facilities=None, k=1, weights=None, objective="median"):
    n = len(points)
    return MetricInstance.from_coords(np.array(points, float)[:, None],
                                      list(range(n)) if clients is None else clients,
                                      list(range(n)) if facilities is None else facilities,
                                      k, weights, objective)


def test_cost_median_and_means():
    inst = line([0, 1, 2], facilities=[1])
    assert cost(inst, [1]) == 2.0
    assert cost(inst.replace(objective="means"), [1]) == 2.0
    inst = line([0, 3], clients=[0], facilities=[1], weights=[2.0])
    assert cost(inst, [1]) == 6.0
    assert cost(inst.replace(objective="means"), [1]) == 18.0


def test_cost_errors():
    inst = line([0, 1, 2], facilities=[1, 2])
    with pytest.raises(InstanceError, match="no open facilities"):
        cost(inst, [])
    with pytest.raises(InstanceError):
        cost(inst, [0])


def test_assign_ties_lowest_id():
    inst = line([0, 1, 2], clients=[1], facilities=[0, 2])
    where, dist = assign(inst, [2, 0])
    assert where.tolist() == [0] and dist.tolist() == [1.0]


def test_instance_validation():
    d = np.zeros((2, 2))
    with pytest.raises(ValueError):
        MetricInstance(np.zeros((2, 3)), [0], [1.0], [1], 1)
    with pytest.raises(ValueError):
        MetricInstance(d, [0], [0.0], [1], 1)
    with pytest.raises(ValueError):
        MetricInstance(d, [0, 0], [1.0, 1.0], [1], 1)
    with pytest.raises(ValueError):
        MetricInstance(d, [0], [1.0], [5], 1)
    with pytest.raises(ValueError):
        MetricInstance(d, [0], [1.0], [1], 1, objective="center")


def test_validate_metric_reports_first_violation():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
    rep = validate_metric(d)
    assert rep.status == "triangle" and not rep
    i, j, l = rep.witness
    assert d[i, j] > d[i, l] + d[l, j]
    assert validate_metric(np.array([[0, -1], [-1, 0]], float)).status == "negative"
    assert validate_metric(np.array([[1, 1], [1, 0]], float)).status == "nonzero-diagonal"
    assert validate_metric(np.array([[0, 1], [2, 0]], float)).status == "asymmetry"
    assert validate_metric(np.array([[0, 1], [1, 0]], float)).valid


def test_validate_metric_size_gate():
    d = random_instance(0, 30, 30).distances
    assert validate_metric(d, max_n=10).status == "unchecked"
    assert validate_metric(d, max_n=10, force=True).valid


def test_aspect_ratio():
    assert aspect_ratio(line([0, 1, 3]).distances) == 3.0
    with pytest.raises(DegenerateMetric):
        aspect_ratio(np.zeros((3, 3)))
    with pytest.raises(DegenerateMetric):
        aspect_ratio(np.zeros((1, 1)))


def test_rounded_radius_examples():
    assert rounded_radius(1.0, 0.5) == 1.0
    assert rounded_radius(1.2, 0.5) == 1.5
    assert rounded_radius(1.5, 0.5) == 1.5
    assert rounded_radius(1.6, 0.5) == 2.25
    with pytest.raises(ValueError):
        rounded_radius(0.0, 0.1)


@given(st.floats(1e-3, 1e6), st.sampled_from([0.05, 0.1, 0.2, 0.5]))
def test_rounded_radius_is_tight_power(a, eps):
    m = radius_level(a, eps)
    assert (1 + eps) ** m >= a
    assert (1 + eps) ** (m - 1) < a


def test_rescale_min_distance():
    inst, scale = rescale_min_distance(line([0, 0.5, 2.0]))
    assert scale == 0.5
    off = inst.distances[~np.eye(3, dtype=bool)]
    assert off.min() == 1.0


def test_shortest_paths_matches_triangle_closure():
    d = np.array([[0, 1, 9], [1, 0, 1], [9, 1, 0]], float)
    assert shortest_paths(d)[0, 2] == 2.0


def test_kcenter_radius_is_two_approx():
    inst = line([0, 1, 10, 11], k=2)
    r = kcenter_radius(inst)
    assert 1.0 <= r <= 2.0


def test_normalize_aspect_ratio_bounds():
    rng = np.random.default_rng(3)
    pts = np.concatenate([rng.random(6) * 1e-6, 1e6 + rng.random(6)])
    inst = MetricInstance.from_coords(pts[:, None], list(range(12)), list(range(12)), 2)
    out = normalize_aspect_ratio(inst)
    assert validate_metric(out).valid
    n = inst.n
    assert aspect_ratio(out.distances) <= 4 * n ** 4 * (1 + 1e-9)


def test_normalize_errors():
    inst = line([0, 0, 0, 1], k=3)
    with pytest.raises(InstanceError):
        normalize_aspect_ratio(inst)
    with pytest.raises(ValueError):
        normalize_aspect_ratio(line([0, 1]), alpha=0.5)


def test_json_round_trip(tmp_path):
    inst = random_instance(1, weighted=True)
    p = tmp_path / "i.json"
    p.write_text(json.dumps(instance_to_dict(inst)))
    back = load_instance(p)
    assert np.allclose(back.distances, inst.distances)
    assert back.clients.tolist() == inst.clients.tolist()
    assert back.weights.tolist() == inst.weights.tolist()


def test_json_coords_and_errors(tmp_path):
    inst = instance_from_dict({"n": 2, "coords": [[0, 0], [3, 4]], "clients": [{"id": 0}],
                               "facilities": [1], "k": 1})
    assert inst.distances[0, 1] == 5.0
    with pytest.raises(InstanceError):
        instance_from_dict({"n": 3, "distances": [[0]], "clients": [], "facilities": [], "k": 1})
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(InstanceError):
        load_instance(bad)


def test_subset_table_matches_cost():
    inst = random_instance(2, n_clients=6, n_facilities=5)
    table = subsets_cost_table(inst)
    fac = inst.facilities
    assert math.isinf(table[0])
    for mask in range(1, 32):
        F = [int(fac[i]) for i in range(5) if mask >> i & 1]
        assert table[mask] == pytest.approx(cost(inst, F), rel=1e-12)


def test_solution_json_shape():
    inst = random_instance(0)
    sol = make_solution(inst, [1, 0])
    d = sol.to_dict()
    assert d["facilities"] == [0, 1]
    assert set(d) == {"facilities", "cost", "objective", "assignment", "guesses_evaluated", "ratio_vs_oracle"}
    assert [a["client"] for a in d["assignment"]] == sorted(inst.clients.tolist())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_random_instances_are_metrics(seed):
    inst = random_instance(seed, n_clients=5, n_facilities=5, overlap=2, clusters=2)
    assert validate_metric(inst).valid
