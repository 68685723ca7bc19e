import itertools
import math

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdnf.cayley import (
    CayleySpec,
    abelian_groups,
    cayley_stability,
    circulant_spec,
    dense_cayley_stability_scan,
    generate_cayley,
    hypercube_spec,
    label_sets,
    parse_spec,
    regular_wiring,
    root_deviation_gain,
)
from bdnf.game import costs, is_stable, node_cost, uniform_game
from bdnf.graph import all_pairs_distances

from .test_graph import cycle, to_nx

# number of Abelian groups of order n (products of partition counts of prime exponents)
GROUP_COUNTS = {1: 1, 2: 1, 4: 2, 8: 3, 9: 2, 12: 2, 16: 5, 32: 7, 36: 4, 72: 6}


@st.composite
def cayley_specs(draw, max_n=16):
    factors = tuple(draw(st.lists(st.integers(2, 5), min_size=1, max_size=3)))
    if math.prod(factors) > max_n:
        factors = factors[:1]
    probe = CayleySpec(factors, ())
    others = [u for u in probe.elements() if u != probe.identity]
    k = draw(st.integers(1, min(3, len(others))))
    gens = draw(st.permutations(others))[:k]
    return CayleySpec(factors, tuple(gens))


def test_generate_examples():
    w = generate_cayley(circulant_spec(6, [1, 2]))
    assert w.out_edges == tuple(((v + 1) % 6, (v + 2) % 6) for v in range(6))
    cube = generate_cayley(hypercube_spec(3))
    assert nx.is_isomorphic(to_nx(cube), nx.hypercube_graph(3).to_directed())
    w = generate_cayley(CayleySpec((2, 4), ((1, 0), (0, 1))))
    assert w.n == 8 and w.out_degrees() == [2] * 8


def test_regular_wiring_examples():
    assert regular_wiring(5, [1]) == cycle(5)
    w = regular_wiring(16, [1, 2])
    assert w.out_edges[15] == (0, 1)
    assert regular_wiring(8, [1, 5]) == generate_cayley(circulant_spec(8, [1, 5]))
    with pytest.raises(ValueError):
        regular_wiring(5, [5])


def test_spec_validation_and_parsing():
    with pytest.raises(ValueError, match="identity"):
        CayleySpec((4,), ((0,),))
    with pytest.raises(ValueError, match="distinct"):
        CayleySpec((4,), ((1,), (5,)))
    assert parse_spec("2,2,2", "1,0,0;0,1,0;0,0,1") == hypercube_spec(3)


def test_label_sets_z5():
    ls = label_sets(circulant_spec(5, [1, 2]))
    assert ls.labels[4] == frozenset({(0, 2)})
    assert ls.labels[3] == frozenset({(1, 1)})
    assert ls.S[1] == frozenset({4}) and ls.S[0] == frozenset()


def test_root_deviation_examples():
    r = root_deviation_gain(circulant_spec(16, [1, 2]), None, 1)
    assert r.applicable and r.exact_delta == 11 and r.new_target == 4
    r = root_deviation_gain(circulant_spec(5, [1]), None, 0)
    assert r.exact_delta == -21
    r = root_deviation_gain(hypercube_spec(5), None, 0)
    assert not r.applicable and "identity" in r.reason
    with pytest.raises(IndexError):
        root_deviation_gain(circulant_spec(5, [1]), None, 1)


def test_instability_examples():
    for spec in [hypercube_spec(5)] + [circulant_spec(n, [1, 2]) for n in (16, 24, 32)]:
        v = cayley_stability(spec)
        assert not v.stable
        before, after = v.replay
        assert after < before


def test_dense_scan_examples():
    assert cayley_stability(circulant_spec(6, [1, 2, 3])).stable
    rep = dense_cayley_stability_scan(4)
    assert rep.all_stable and rep.checked == 8
    # k=2 at n=5 already satisfies 2k > n - 2, so {1,4} is scanned, not a boundary case
    assert cayley_stability(circulant_spec(5, [1, 4])).stable
    rep = dense_cayley_stability_scan(5, include_boundary=True)
    assert rep.all_stable and rep.checked == 11
    assert all(spec.k == 1 for spec, _ in rep.boundary)
    with pytest.raises(ValueError):
        dense_cayley_stability_scan(65)


def test_abelian_group_counts():
    for n, count in GROUP_COUNTS.items():
        groups = abelian_groups(n)
        assert len(groups) == count
        assert all(math.prod(g) == n for g in groups)


@given(cayley_specs())
def test_cayley_wirings_are_vertex_transitive(spec):
    g = uniform_game(spec.n, spec.k)
    c = costs(g, generate_cayley(spec))
    assert (c == c[0]).all()


@given(cayley_specs())
def test_labels_commute(spec):
    d = all_pairs_distances(generate_cayley(spec))
    if (d < 0).any():
        with pytest.raises(ValueError):
            label_sets(spec)
        return
    ls = label_sets(spec)
    for v, labels in enumerate(ls.labels):
        for lab in labels:
            assert sum(lab) == d[0, v]
            for perm in itertools.permutations(range(spec.k)):
                # applying the generators in any order lands on the same node
                u = spec.identity
                for i in perm:
                    u = spec.add(u, spec.scale(spec.generators[i], lab[i]))
                assert spec.index(u) == v


@given(cayley_specs())
def test_node_zero_verdict_matches_full_check(spec):
    w = generate_cayley(spec)
    assert cayley_stability(spec).stable == bool(is_stable(uniform_game(spec.n, spec.k), w))


@given(cayley_specs())
def test_exact_delta_is_a_cost_difference(spec):
    w = generate_cayley(spec)
    g = uniform_game(spec.n, spec.k)
    for i in range(spec.k):
        r = root_deviation_gain(spec, w, i)
        if r.applicable:
            new = tuple(r.new_target if t == spec.index(spec.generators[i]) else t for t in w.out_edges[0])
            assert r.exact_delta == node_cost(g, w, 0) - node_cost(g, w.with_targets(0, new), 0)


@given(st.integers(3, 20), st.lists(st.integers(1, 19), min_size=1, max_size=3, unique=True))
def test_regular_wiring_equals_generate_cayley(n, offsets):
    offsets = [a for a in offsets if a % n]
    if not offsets or len({a % n for a in offsets}) != len(offsets):
        return
    assert regular_wiring(n, offsets) == generate_cayley(circulant_spec(n, offsets))
