import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdnf.dynamics import Scheduler, run_walk
from bdnf.gadgets import (
    SAT_SIZE,
    CnfFormula,
    SearchBudgetExceeded,
    all_pure_equilibria,
    asymmetric_gadget,
    dominance_witness,
    exhaustive_ne_search,
    legal_sets,
    lifted_asymmetric_gadget,
    parse_dimacs,
    prune_dominated,
    pruned_ne_search,
    restricted_profiles,
    sat_ne_search,
    sat_reduction,
    start_profile,
    symmetric_gadget,
    symmetric_params,
    variable_gadget,
)
from bdnf.game import GameInstance, is_stable, uniform_game
from bdnf.graph import Wiring

SWITCHES = ["0C", "0LB", "0RB", "1C", "1LB", "1RB"] * 2


@st.composite
def small_games(draw):
    n = draw(st.integers(3, 5))
    weights = np.array([[0 if i == j else draw(st.integers(0, 4)) for j in range(n)] for i in range(n)], float)
    allowed = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        allowed.append(tuple(sorted(draw(st.permutations(others))[:draw(st.integers(1, n - 1))])))
    return GameInstance.build(weights, 1, allowed, M=50)


def test_asymmetric_gadget_has_no_equilibrium():
    gad = asymmetric_gadget()
    g = gad.game
    assert g.n == 11 and math.prod(len(legal_sets(g, v)) for v in range(g.n)) == 64
    assert all_pure_equilibria(g) == []
    res = exhaustive_ne_search(g)
    assert not res.found and res.visited == 131


def test_asymmetric_walks_all_loop():
    g = asymmetric_gadget().game
    for w in restricted_profiles(g):
        assert run_walk(g, w, check_lemmas=False).termination.kind == "LoopDetected"


def test_start_profile_switching_sequence():
    gad = asymmetric_gadget()
    tr = run_walk(gad.game, start_profile(gad), Scheduler("round-robin"), check_lemmas=False)
    t = tr.termination
    assert (t.kind, t.period, t.first_seen) == ("LoopDetected", 22, 0)
    assert [gad.role_of(r.node) for r in tr.loop_records()] == SWITCHES


def test_lifted_gadget_has_no_equilibrium():
    gad = lifted_asymmetric_gadget()
    assert gad.game.n == 13 and gad.game.k == 2
    assert not exhaustive_ne_search(gad.game).found
    tr = run_walk(gad.game, start_profile(gad), check_lemmas=False)
    assert tr.termination.kind == "LoopDetected" and tr.termination.period == 26


def test_asymmetric_needs_large_penalty():
    with pytest.raises(ValueError):
        asymmetric_gadget(M=11)


def test_symmetric_params_arithmetic():
    p = symmetric_params(100, 1, 0.5)
    assert p.beta == pytest.approx(1.5)
    assert p.alpha == pytest.approx(1.5 + 98 / 99 - 0.5)
    assert p.alpha == pytest.approx(1.98990, abs=1e-5)
    assert p.alpha * 99 == pytest.approx(197.0, abs=0.01)
    assert p.beta * 99 + p.gamma * 98 == pytest.approx(246.5)
    assert p.lemma_inequalities() == (True, True, True)
    with pytest.raises(ValueError):
        symmetric_params(100, 1, 98 / 99)
    with pytest.raises(ValueError):
        symmetric_params(100, 1, 0.0)


def test_symmetric_default_has_no_equilibrium():
    gad = symmetric_gadget()
    assert gad.game.n == 14 and gad.game.is_symmetric()
    assert gad.params.lemma_inequalities() == (True, True, True)
    res, surv = pruned_ne_search(gad.game)
    assert not res.found
    assert [len(s) for s in surv] == [13, 1, 1, 12, 12, 13, 1, 1, 12, 12, 1, 1, 1, 1]
    assert res.visited == 3_796_580


def test_shared_extra_layout_admits_equilibrium():
    gad = symmetric_gadget(private_extras=False, extra_pin="0C")
    assert gad.game.n == 11
    res, _ = pruned_ne_search(gad.game)
    assert res.found and is_stable(gad.game, res.profile)


def test_compiled_and_python_searches_agree():
    for g in (asymmetric_gadget().game, symmetric_gadget(private_extras=False, extra_pin="0C").game):
        cands = prune_dominated(g)
        a = exhaustive_ne_search(g, cands, compiled=True)
        b = exhaustive_ne_search(g, cands, compiled=False)
        assert a.profile == b.profile and a.visited == b.visited


def test_uniform_searches():
    for n in (4, 5, 6):
        res = exhaustive_ne_search(uniform_game(n, 1))
        assert res.profile == Wiring(n, 1, tuple(((v + 1) % n,) for v in range(n)))
    res = exhaustive_ne_search(uniform_game(5, 2))
    assert res.found and is_stable(uniform_game(5, 2), res.profile)


def test_search_budget():
    with pytest.raises(SearchBudgetExceeded):
        exhaustive_ne_search(symmetric_gadget().game, budget=1000)


def test_variable_gadget_has_two_equilibria():
    g, names = variable_gadget()
    eqs = all_pure_equilibria(g)
    assert len(eqs) == 2
    assert {w.out_edges[names.index("V")] for w in eqs} == {(1,), (2,)}


@given(small_games())
def test_search_matches_brute_force(g):
    eqs = {w.key() for w in all_pure_equilibria(g)}
    for compiled in (True, False):
        res = exhaustive_ne_search(g, compiled=compiled)
        assert res.found == bool(eqs)
        if res.found:
            assert res.profile.key() in eqs


@given(small_games())
def test_pruning_keeps_every_equilibrium(g):
    cands = prune_dominated(g)
    for w in all_pure_equilibria(g):
        assert all(tuple(sorted(w.out_edges[v])) in cands[v] for v in range(g.n))


@given(small_games())
def test_removed_sets_have_dominance_witnesses(g):
    cands = prune_dominated(g)
    for v in range(g.n):
        for a in legal_sets(g, v):
            if a not in cands[v]:
                assert dominance_witness(g, v, cands, a) is not None


def test_cnf_validation():
    with pytest.raises(ValueError, match="3 literals"):
        CnfFormula(2, ((1, 2),))
    with pytest.raises(ValueError, match="range"):
        CnfFormula(2, ((1, 2, 3),))
    assert CnfFormula(3, ((1, 2, -3),)).satisfiable()
    assert not CnfFormula(1, ((1, 1, 1), (-1, -1, -1))).satisfiable()


def test_parse_dimacs():
    f = parse_dimacs("c demo\np cnf 3 2\n1 2 -3 0\n-1\n2 3 0\n")
    assert f == CnfFormula(3, ((1, 2, -3), (-1, 2, 3)))
    for bad in ("1 2 3 0\n", "p cnf 3 1\n1 2 3\n", "p cnf 3 2\n1 2 3 0\n", "c only\n"):
        with pytest.raises(ValueError):
            parse_dimacs(bad)


def test_sat_reduction_size():
    for f in (CnfFormula(3, ((1, 2, -3),)), CnfFormula(2, ((1, 2, 2), (-1, 2, 2), (1, -2, -2)))):
        inst = sat_reduction(f)
        a, b, c = SAT_SIZE
        assert inst.game.n == a * f.num_vars + b * len(f.clauses) + c == len(inst.names)


def test_sat_reduction_discriminates():
    sat = sat_reduction(CnfFormula(3, ((1, 2, -3),)))
    res = sat_ne_search(sat, budget=50_000_000)
    assert res.found and is_stable(sat.game, res.profile)
    unsat = sat_reduction(CnfFormula(1, ((1, 1, 1), (-1, -1, -1))))
    assert not sat_ne_search(unsat, budget=50_000_000).found


def test_restricted_profiles_cover_product():
    g, _ = variable_gadget()
    profiles = list(restricted_profiles(g))
    assert len(profiles) == math.prod(len(legal_sets(g, v)) for v in range(g.n)) == 2
    assert len({p.key() for p in profiles}) == 2
