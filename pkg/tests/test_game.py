import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdnf.game import (
    GameInstance,
    best_response,
    costs,
    is_stable,
    node_cost,
    replay_deviation,
    residual_distances,
    social_cost,
    uniform_game,
    utopian_bound,
    utopian_cost,
)
from bdnf.graph import UNREACHABLE, Wiring

from .test_graph import W72, cycle


def nx_cost(g: GameInstance, w: Wiring, v: int) -> float:
    """Cost by networkx BFS, independent of the package's distance code."""
    G = nx.DiGraph()
    G.add_nodes_from(range(w.n))
    G.add_edges_from(w.edges())
    d = nx.single_source_shortest_path_length(G, v)
    return float(sum(g.weights[v, u] * d.get(u, g.M) for u in range(g.n) if u != v))


def brute_best(g: GameInstance, w: Wiring, v: int) -> float:
    s = g.legal_size(v)
    return min(nx_cost(g, w.with_targets(v, c), v) for c in itertools.combinations(g.allowed[v], s))


@st.composite
def games_and_wirings(draw, n_max=7):
    n = draw(st.integers(3, n_max))
    k = draw(st.integers(1, min(3, n - 1)))
    weights = np.array([[0 if i == j else draw(st.integers(0, 3)) for j in range(n)] for i in range(n)], float)
    allowed = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        size = draw(st.integers(k, n - 1))
        allowed.append(tuple(sorted(draw(st.permutations(others))[:size])))
    g = GameInstance.build(weights, k, allowed)
    rows = []
    for v in range(n):
        d = draw(st.integers(0, k))
        rows.append(tuple(draw(st.permutations(allowed[v]))[:d]))
    return g, Wiring(n, k, tuple(rows))


def test_node_cost_examples():
    assert node_cost(uniform_game(5, 1), cycle(5), 2) == 10
    wts = np.zeros((3, 3))
    wts[0, 1], wts[0, 2] = 2, 3
    assert node_cost(GameInstance.build(wts, 1), cycle(3), 0) == 8
    g = uniform_game(3, 1, M=30)
    assert node_cost(g, Wiring(3, 1, ((), (2,), (0,))), 0) == 60


def test_utopian_examples():
    assert utopian_cost(uniform_game(7, 2), 0) == 10
    assert utopian_cost(uniform_game(5, 1), 3) == 10
    assert utopian_cost(uniform_game(15, 2), 0) == 34
    with pytest.raises(ValueError):
        wts = np.ones((3, 3)) - np.eye(3)
        wts[0, 1] = 2
        utopian_cost(GameInstance.build(wts, 1), 0)


@pytest.mark.parametrize("n,k", [(5, 1), (5, 2), (6, 1)])
def test_utopian_is_the_best_cost_over_all_wirings(n, k):
    g = uniform_game(n, k)
    options = [list(itertools.combinations([u for u in range(n) if u != v], k)) for v in range(n)]
    best = min(nx_cost(g, Wiring(n, k, rows), 0) for rows in itertools.product(*options))
    assert best == utopian_cost(g, 0)


def test_residual_examples():
    g = uniform_game(4, 1)
    d = residual_distances(g, cycle(4), 0)
    assert d[1, 3] == 2 and d[1, 0] == 3 and d[3, 1] == UNREACHABLE
    d = residual_distances(uniform_game(3, 1), Wiring.empty(3, 1), 0)
    assert (d[~np.eye(3, dtype=bool)] == UNREACHABLE).all()
    # dropping the bridge (node 4 in 1-based labels) cuts the way back to the root
    d = residual_distances(uniform_game(7, 2), W72, 3)
    assert d[2, 0] == UNREACHABLE


def test_best_response_examples():
    br = best_response(uniform_game(7, 2), W72, 3)
    assert br.targets == (0, 2) and br.cost == 11 and not br.improved
    br = best_response(uniform_game(4, 1), cycle(4), 0)
    assert br.targets == (1,) and not br.improved
    g = uniform_game(4, 2)
    br = best_response(g, Wiring.empty(4, 2), 0)
    assert br.targets == (1, 2) and br.cost == 2 + g.M and br.improved


def test_stability_examples():
    for n in (2, 5, 11):
        assert is_stable(uniform_game(n, 1), cycle(n))
    assert is_stable(uniform_game(7, 2), W72)
    w = Wiring(16, 2, tuple(((v + 1) % 16, (v + 2) % 16) for v in range(16)))
    g = uniform_game(16, 2)
    res = is_stable(g, w)
    assert not res
    before, after = replay_deviation(g, w, res.witness)
    assert after < before
    assert (before, after) == (res.witness.old_cost, res.witness.new_cost)


def test_stability_needs_full_budget():
    with pytest.raises(ValueError, match="links"):
        is_stable(uniform_game(4, 2), Wiring(4, 2, ((1,), (2, 3), (3, 0), (0, 1))))


def test_game_validation():
    with pytest.raises(ValueError, match="penalty"):
        uniform_game(4, 1, M=3)
    with pytest.raises(ValueError):
        uniform_game(4, 4)
    with pytest.raises(ValueError, match="non-negative"):
        GameInstance.build(-np.ones((3, 3)) + np.eye(3), 1)


@given(games_and_wirings())
def test_costs_match_networkx(gw):
    g, w = gw
    c = costs(g, w)
    for v in range(g.n):
        assert c[v] == pytest.approx(nx_cost(g, w, v))
        assert node_cost(g, w, v) == pytest.approx(c[v])
    assert social_cost(g, w) == pytest.approx(c.sum())


@given(games_and_wirings())
def test_best_response_matches_brute_force(gw):
    g, w = gw
    for v in range(g.n):
        br = best_response(g, w, v)
        assert br.cost == pytest.approx(brute_best(g, w, v))
        assert len(br.targets) == g.legal_size(v) and set(br.targets) <= set(g.allowed[v])
        assert nx_cost(g, w.with_targets(v, br.targets), v) == pytest.approx(br.cost)
        assert br.current_cost == pytest.approx(nx_cost(g, w, v))


@given(games_and_wirings())
def test_stability_agrees_with_brute_force(gw):
    g, w = gw
    rows = [tuple(g.allowed[v][:g.legal_size(v)]) for v in range(g.n)]
    full = Wiring(g.n, g.k, tuple(rows))
    stable = all(brute_best(g, full, v) >= nx_cost(g, full, v) - 1e-9 for v in range(g.n))
    res = is_stable(g, full)
    assert bool(res) == stable
    if not res:
        before, after = replay_deviation(g, full, res.witness)
        assert after < before


@given(games_and_wirings(n_max=6), st.sampled_from([2.0, 3.5, 10.0]))
def test_best_response_is_scale_invariant(gw, c):
    g, w = gw
    scaled = GameInstance(g.n, g.budgets, g.weights * c, g.allowed, g.M)
    for v in range(g.n):
        a, b = best_response(g, w, v), best_response(scaled, w, v)
        assert a.targets == b.targets and a.improved == b.improved
        assert b.cost == pytest.approx(c * a.cost)


@given(games_and_wirings(n_max=6))
def test_optimal_incumbent_is_kept(gw):
    g, w = gw
    for v in range(g.n):
        br = best_response(g, w, v)
        again = best_response(g, w.with_targets(v, br.targets), v)
        assert not again.improved and set(again.targets) == set(br.targets)


@given(st.integers(2, 40), st.integers(1, 5))
def test_utopian_bound_layers(n, k):
    k = min(k, n - 1)
    total, left, hop = 0, n - 1, 1
    while left:
        take = min(k ** hop, left)
        total, left, hop = total + hop * take, left - take, hop + 1
    assert utopian_bound(n, k) == total
