import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdnf.construct import (
    bridge_wiring,
    build_stable,
    construct,
    diameter_two_wiring,
    pack_tuples,
    tree_layout,
    tree_size,
)
from bdnf.game import costs, is_stable, uniform_game, utopian_bound
from bdnf.graph import diameter

from .test_game import brute_best, nx_cost
from .test_graph import W72


def test_seven_two_matches_worked_example():
    w = build_stable(7, 2)
    assert w == W72
    assert list(costs(uniform_game(7, 2), w)) == [10, 12, 14, 11, 11, 11, 11]


def test_k1_is_hamiltonian_cycle():
    for n in (2, 3, 9, 40):
        w = build_stable(n, 1)
        assert all(len(r) == 1 for r in w.out_edges)
        assert diameter(w) == n - 1


def test_nine_two_three_roots():
    L = tree_layout(9, 2)
    assert (L.h, L.n_tree, L.t) == (2, 7, 2)
    assert L.roots == [1, 8, 9]
    rep = construct(9, 2)
    assert rep.verified and is_stable(uniform_game(9, 2), rep.wiring)


def test_layout_invariants():
    for n, k in [(7, 2), (9, 2), (34, 2), (21, 3), (52, 3), (30, 4)]:
        L = tree_layout(n, k)
        assert L.n_tree == tree_size(k, L.h) <= n < tree_size(k, L.h + 1)
        assert L.t + 1 == L.tau * k + L.t1 and 0 <= L.t1 < k
        assert len(L.leaves()) == k ** L.h
        assert L.hubs == list(range(2, k + 2))
    with pytest.raises(ValueError):
        tree_layout(3, 3)


def test_pack_tuples_examples():
    assert pack_tuples(tree_layout(7, 2)) == {}
    # two pairs: one from a leaf under node 4, one from a leaf under node 5
    L = tree_layout(34, 2)
    feeds = pack_tuples(L, frozenset({L.bridge}))
    assert L.tau == 2 and L.h == 4
    under4, under5 = set(L.subtree_leaves(4)), set(L.subtree_leaves(5))
    assert sorted(len(set(feeds) & s) for s in (under4, under5)) == [1, 1]
    # odd tau for k=3: the last tuple goes under the third child of hub 2
    L = tree_layout(21, 3)
    feeds = pack_tuples(L, frozenset({L.bridge}))
    assert L.tau == 3
    assert set(feeds) == {5, 6, 7} and feeds[7] == (19, 20, 21)


def test_bridge_wiring_one_untupled_root():
    L = tree_layout(16, 3)
    assert (L.tau, L.t1) == (1, 1)
    targets = bridge_wiring(L)
    assert targets[0] == 16 and set(targets[1:]) <= set(L.hubs) and len(targets) == 3


def test_seven_two_bridge_links_root_and_right_hub():
    assert set(build_stable(7, 2).out_edges[3]) == {0, 2}


@pytest.mark.parametrize("n,k", [(4, 2), (5, 2), (6, 2), (7, 2), (8, 2), (5, 3), (6, 3), (7, 3)])
def test_small_outputs_pass_brute_force_check(n, k):
    g = uniform_game(n, k)
    w = build_stable(n, k)
    assert all(brute_best(g, w, v) >= nx_cost(g, w, v) - 1e-9 for v in range(n))


@given(st.integers(3, 40), st.integers(2, 4))
def test_constructed_wirings_are_stable_and_full(n, k):
    if k >= n or (k == 4 and n > 30):
        return
    rep = construct(n, k)
    w = rep.wiring
    assert rep.verified
    assert all(len(r) == k for r in w.out_edges)
    assert is_stable(uniform_game(n, k), w)


@given(st.integers(3, 20), st.integers(2, 4))
def test_diameter_two_wirings_are_utopian(n, k):
    if not k < n <= k * k + k:
        return
    w = diameter_two_wiring(n, k)
    assert diameter(w) <= 2
    assert all(c == utopian_bound(n, k) for c in costs(uniform_game(n, k), w))


def test_perfect_trees_root_is_utopian():
    for n, k in [(7, 2), (15, 2), (31, 2), (13, 3), (40, 3)]:
        rep = construct(n, k)
        c = costs(uniform_game(n, k), rep.wiring)
        u = utopian_bound(n, k)
        assert c[0] == u
        L = tree_layout(n, k)
        bridges = {b + 1 for b in rep.bridges}
        assert all(c[x - 1] == u + 1 for x in L.leaves() if x not in bridges)


def test_bad_arguments():
    with pytest.raises(ValueError):
        construct(1, 1)
    with pytest.raises(ValueError):
        construct(4, 4)
