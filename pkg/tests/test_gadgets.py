import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fptc.baseline import brute_force_opt
from fptc.errors import BudgetExceeded, InstanceError
from fptc.gadgets import (LabelCoverInstance, SetSystem, ThreeSatFormula, assignment_labeling, clause_variable_game,
                          coverage_fraction, coverage_to_kmedian, decode, encode, greedy_max_coverage,
                          hypergrid_coverage, label_cover_opt, merge_labeling, merge_supervertices,
                          parallel_repetition, random_3sat, repeat_labeling)
from fptc.metric import validate_metric


def single_edge_game(sigma_u=2, sigma_v=2, proj=(0, 1)):
    return LabelCoverInstance(1, 1, sigma_u, sigma_v, ((0, 0),), (proj,))


CONTRADICTION = ThreeSatFormula(1, ((1, 1, 1), (-1, -1, -1)))


@given(st.lists(st.integers(0, 4), min_size=1, max_size=5))
def test_encode_decode_round_trip(digits):
    assert decode(encode(digits, 5), 5, len(digits)) == tuple(digits)


# ------------------------------------------------------------- label cover

def test_single_clause_game_parameters():
    L = clause_variable_game(ThreeSatFormula(3, ((1, 2, 3),)))
    assert (L.n_left, L.n_right, L.sigma_u, L.sigma_v, len(L.edges)) == (1, 3, 7, 2, 3)
    assert L.is_u_regular and L.d_u == 3


def test_formula_validation():
    with pytest.raises(InstanceError):
        ThreeSatFormula(2, ((1, 2, 3),))
    with pytest.raises(InstanceError):
        ThreeSatFormula(3, ((1, 2),))


def test_satisfiable_game_has_value_one():
    phi, planted = random_3sat(4, 2, seed=3)
    assert phi.satisfied_by(planted)
    L = clause_variable_game(phi)
    assert label_cover_opt(L) == 1
    assert L.value(*assignment_labeling(phi, planted)) == 1


def test_contradiction_game_below_one():
    opt = label_cover_opt(clause_variable_game(CONTRADICTION))
    assert opt < 1
    assert opt == Fraction(5, 6)  # one of the six edges must break


def test_label_cover_opt_small_cases():
    assert label_cover_opt(single_edge_game()) == 1
    half = LabelCoverInstance(1, 1, 1, 2, ((0, 0), (0, 0)), ((0,), (1,)))
    assert label_cover_opt(half) == Fraction(1, 2)
    assert label_cover_opt(LabelCoverInstance(0, 0, 1, 1, (), ())) == 1
    with pytest.raises(BudgetExceeded):
        label_cover_opt(clause_variable_game(random_3sat(5, 9, 0)[0]), budget=100)


def test_label_cover_round_trip():
    L = clause_variable_game(CONTRADICTION)
    assert LabelCoverInstance.from_dict(L.to_dict()) == L
    phi = random_3sat(5, 4, 1)[0]
    assert ThreeSatFormula.from_dict(phi.to_dict()) == phi


def test_merge_trivial_groupings():
    L = clause_variable_game(random_3sat(4, 3, 0)[0])
    assert merge_supervertices(L, L.n_left) == L
    one = merge_supervertices(L, 1)
    assert one.n_left == 1 and one.sigma_u == 7 ** 3 and len(one.edges) == len(L.edges)


@pytest.mark.parametrize("phi", [CONTRADICTION, random_3sat(4, 2, 5)[0]])
def test_merge_preserves_opt(phi):
    L = clause_variable_game(phi)
    assert label_cover_opt(merge_supervertices(L, 1)) == label_cover_opt(L)


def test_merge_pads_with_vertex_zero_copies():
    phi, planted = random_3sat(4, 3, 2)
    L = clause_variable_game(phi)
    M = merge_supervertices(L, 2)
    assert M.n_left == 2 and M.sigma_u == 49 and len(M.edges) == len(L.edges) + 3
    left, right = assignment_labeling(phi, planted)
    assert M.value(merge_labeling(L, left, 2), right) == 1
    with pytest.raises(InstanceError):
        merge_supervertices(L, 4)


def test_parallel_repetition_shapes():
    L = LabelCoverInstance(2, 1, 2, 2, ((0, 0), (1, 0)), ((0, 1), (1, 1)))
    assert parallel_repetition(L, 1) == L
    R = parallel_repetition(L, 2)
    assert len(R.edges) == 4 and R.sigma_u == 4 and R.sigma_v == 4
    assert (R.n_left, R.n_right) == (4, 1)
    with pytest.raises(BudgetExceeded):
        parallel_repetition(L, 12, budget=1000)


def test_parallel_repetition_keeps_satisfiable_games_satisfiable():
    phi, planted = random_3sat(3, 1, 0)
    L = clause_variable_game(phi)
    R = parallel_repetition(L, 2)
    left, right = assignment_labeling(phi, planted)
    assert R.value(*repeat_labeling(L, left, right, 2)) == 1
    assert label_cover_opt(R) == 1


# --------------------------------------------------------------- hypergrids

def test_hypergrid_parameters():
    G = LabelCoverInstance(1, 1, 2, 2, ((0, 0), (0, 0)), ((0, 1), (1, 0)))
    H = hypergrid_coverage(G, 2)
    assert H.grid_weight(0) == Fraction(1, 4)
    four = LabelCoverInstance(4, 1, 1, 1, tuple((u, 0) for u in range(4)), ((0,),) * 4)
    assert hypergrid_coverage(four, 3).k == 12
    with pytest.raises(InstanceError):
        hypergrid_coverage(LabelCoverInstance(2, 1, 1, 1, ((0, 0), (0, 0), (1, 0)), ((0,),) * 3), 2)


def test_two_slices_cover_three_quarters():
    H = hypergrid_coverage(single_edge_game(), 2)
    assert H.n_grids() == 1
    chosen = [H.set_id(0, 0, 0), H.set_id(1, 0, 1)]
    assert [H.slice_in(s, 0, (0, 0))[0] for s in chosen] == [0, 1]
    assert H.coverage_fraction(chosen) == Fraction(3, 4)
    assert H.materialize().coverage_fraction(chosen) == Fraction(3, 4)


@pytest.mark.parametrize("a", [2, 3, 4])
def test_distinct_coordinate_slices_closed_form(a):
    for used in range(a + 1):
        game = single_edge_game(a, a, tuple(range(a)))
        H = hypergrid_coverage(game, a)
        chosen = [H.set_id(t, 0, t) for t in range(used)]
        assert H.coverage_fraction(chosen) == 1 - (1 - Fraction(1, a)) ** used
    assert coverage_fraction(H, []) == 0


def small_games():
    yield clause_variable_game(random_3sat(3, 1, 0)[0])
    yield clause_variable_game(CONTRADICTION)
    yield LabelCoverInstance(2, 2, 2, 2, ((0, 0), (0, 1), (1, 0), (1, 0)), ((0, 1), (1, 1), (1, 0), (0, 0)))


@pytest.mark.parametrize("game", list(small_games()))
def test_total_grid_weight_is_one(game):
    for a in (1, 2, 3):
        H = hypergrid_coverage(game, a)
        assert H.total_grid_weight() == 1
        assert H.total_weight() == a ** game.sigma_v


@pytest.mark.parametrize("game", list(small_games()))
def test_analytic_coverage_matches_materialized(game):
    H = hypergrid_coverage(game, 2)
    S = H.materialize()
    assert S.total_weight() == H.total_weight()
    rng = np.random.default_rng(len(game.edges))
    for _ in range(20):
        chosen = sorted(rng.choice(H.n_sets, size=rng.integers(0, 5), replace=False).tolist())
        assert H.coverage_fraction(chosen) == S.coverage_fraction(chosen)


@pytest.mark.parametrize("game", list(small_games()))
def test_each_set_meets_a_grid_in_one_slice_or_nothing(game):
    a = 2
    H = hypergrid_coverage(game, a)
    S = H.materialize()
    cells = a ** game.sigma_v
    xs = list(itertools.product(range(a), repeat=game.sigma_v))
    for g, (v, i) in enumerate(H.grids()):
        block = range(g * cells, (g + 1) * cells)
        for sid, members in enumerate(S.sets):
            inside = {e - g * cells for e in members if e in block}
            if not inside:
                continue
            slices = [{t for t, x in enumerate(xs) if x[c] == j} for c in range(game.sigma_v) for j in range(a)]
            assert inside in slices


def test_completeness_chain():
    phi, planted = random_3sat(3, 2, seed=11)
    L = clause_variable_game(phi)
    left, right = assignment_labeling(phi, planted)
    M = merge_supervertices(L, 1)
    mleft = merge_labeling(L, left, 1)
    R = parallel_repetition(M, 2)
    rleft, rright = repeat_labeling(M, mleft, right, 2)
    assert R.value(rleft, rright) == 1
    H = hypergrid_coverage(R, 2)
    assert H.coverage_fraction(H.labeling_sets(rleft)) == 1


def test_satisfiable_gadget_embeds_with_opt_total_weight():
    phi, planted = random_3sat(3, 1, seed=0)
    L = clause_variable_game(phi)
    H = hypergrid_coverage(L, 2)
    S = H.materialize()
    left, _ = assignment_labeling(phi, planted)
    assert S.coverage_fraction(H.labeling_sets(left)) == 1
    inst = coverage_to_kmedian(S)
    assert validate_metric(inst).valid
    opt = brute_force_opt(inst)
    assert opt.cost == pytest.approx(float(S.total_weight()), rel=1e-9)


# ---------------------------------------------------------- set systems

def test_set_system_validation_and_round_trip():
    with pytest.raises(InstanceError):
        SetSystem([1.0, 0.0], [[0]], 1)
    with pytest.raises(InstanceError):
        SetSystem([1.0], [[3]], 1)
    with pytest.raises(InstanceError):
        SetSystem([1.0], [[0]], 2)
    S = SetSystem([1.0, 2.0], [[0], [0, 1]], 1)
    assert SetSystem.from_dict(S.to_dict()) == S


def test_single_set_embedding():
    inst = coverage_to_kmedian(SetSystem([2.5], [[0]], 1))
    assert inst.distances[0, 1] == 1.0 and inst.k == 1
    assert brute_force_opt(inst).cost == 2.5


def test_missed_elements_are_far():
    S = SetSystem([1.0, 1.0, 1.0], [[0, 1], [1, 2]], 1)
    inst = coverage_to_kmedian(S)
    assert inst.distances[0, 2 + 2] >= 3 and inst.distances[1, 2 + 0] >= 3
    assert inst.distances[2 + 0, 2 + 1] == 2.0 and inst.distances[0, 1] == 2.0


def test_disconnected_pairs_get_sentinel():
    S = SetSystem([1.0, 1.0], [[0], [1]], 1)
    inst = coverage_to_kmedian(S)
    assert validate_metric(inst).valid
    assert inst.distances[0, 3] == 2 * 1 + 1
    with pytest.raises(InstanceError):
        coverage_to_kmedian(SetSystem([1.0], [], 0))


def test_greedy_trivial_cases():
    S = SetSystem([1.0] * 6, [[0, 1], [2, 3, 4], [5]], 2)
    assert greedy_max_coverage(S) == ([0, 1], 5.0)
    S.k = 3
    assert greedy_max_coverage(S)[0] == [0, 1, 2]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_greedy_coverage_guarantee(seed):
    rng = np.random.default_rng(seed)
    n, m = 8, 6
    S = SetSystem(rng.integers(1, 5, n).astype(float).tolist(),
                  [rng.choice(n, rng.integers(1, 4), replace=False).tolist() for _ in range(m)], 2)
    best = max(S.covered_weight(c) for c in itertools.combinations(range(m), 2))
    assert greedy_max_coverage(S)[1] >= (1 - 1 / math.e) * best
