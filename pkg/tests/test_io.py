import numpy as np
import pytest
from hypothesis import given

from bdnf.construct import build_stable
from bdnf.gadgets import asymmetric_gadget, symmetric_gadget
from bdnf.game import uniform_game
from bdnf.io import (
    FormatError,
    parse_game,
    parse_wiring,
    read_dimacs,
    read_game,
    read_wiring,
    serialize_game,
    serialize_wiring,
    write_game,
    write_wiring,
)

from .strategies import wirings

HEAD = "bdnf-wiring v1\nn=4 k=2\n"


def test_wiring_round_trip(tmp_path):
    w = build_stable(7, 2)
    assert parse_wiring(serialize_wiring(w)) == w
    write_wiring(tmp_path / "w.bdnf", w)
    assert read_wiring(tmp_path / "w.bdnf") == w


@given(wirings())
def test_wiring_round_trip_property(w):
    assert parse_wiring(serialize_wiring(w)) == w


def test_wiring_comments_and_missing_rows():
    w = parse_wiring("# made by hand\n" + HEAD + "0: 1 2  # first\n2: 3\n")
    assert w.out_edges == ((1, 2), (), (3,), ())


@pytest.mark.parametrize("body,msg", [
    ("3: 3\n", "self-loop"),
    ("0: 1 2 3\n", "k=2"),
    ("0: 1 1\n", "duplicate"),
    ("0: 7\n", "out of range"),
    ("9: 1\n", "out of range"),
    ("0: 1\n0: 2\n", "twice"),
    ("0 1 2\n", "expected"),
    ("0: a\n", "non-integer"),
])
def test_wiring_errors(body, msg):
    with pytest.raises(FormatError, match=msg):
        parse_wiring(HEAD + body)


def test_wiring_header_errors():
    with pytest.raises(FormatError, match="header"):
        parse_wiring("wiring\nn=4 k=2\n")
    with pytest.raises(FormatError, match="size line"):
        parse_wiring("bdnf-wiring v1\nn=4\n")
    with pytest.raises(FormatError, match="truncated"):
        parse_wiring("bdnf-wiring v1\n")


@pytest.mark.parametrize("g", [
    uniform_game(6, 2),
    uniform_game(5, 1, M=77.5),
    asymmetric_gadget().game,
    symmetric_gadget().game,
])
def test_game_round_trip(g, tmp_path):
    h = parse_game(serialize_game(g))
    assert h.n == g.n and h.budgets == g.budgets and h.allowed == g.allowed and h.M == g.M
    assert np.array_equal(h.weights, g.weights)
    write_game(tmp_path / "g.txt", g)
    assert read_game(tmp_path / "g.txt").allowed == g.allowed


def test_uniform_game_text():
    assert serialize_game(uniform_game(4, 2)) == "bdnf-game v1\nuniform 4 2\n[penalty]\n16\n"


@pytest.mark.parametrize("text,msg", [
    ("game\n", "header"),
    ("bdnf-game v1\n", "empty"),
    ("bdnf-game v1\nn=3\n[budgets]\n1 1 1\n", "needs"),
    ("bdnf-game v1\nn=3\n[budgets]\n1 1\n[weights]\n", "lists 2"),
    ("bdnf-game v1\nn=3\n[budgets]\n1 1 1\n[weights]\n0 1\n", "triple"),
    ("bdnf-game v1\nn=3\n[budgets]\n1 1 1\n[weights]\n0 5 1\n", "range"),
    ("bdnf-game v1\nn=3\n[colors]\n", "unknown section"),
    ("bdnf-game v1\nuniform 3\n", "uniform"),
    ("bdnf-game v1\nn=3\n[budgets]\n1 1 1\n[weights]\n0 1 -2\n", "non-negative"),
])
def test_game_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        parse_game(text)


def test_read_dimacs(tmp_path):
    p = tmp_path / "f.cnf"
    p.write_text("p cnf 2 1\n1 -2 2 0\n")
    f = read_dimacs(p)
    assert f.num_vars == 2 and f.clauses == ((1, -2, 2),)
