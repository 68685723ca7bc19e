"""Text formats: wirings, games and DIMACS CNF."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .game import GameInstance, uniform_game
from .gadgets import CnfFormula, parse_dimacs
from .graph import Wiring

WIRING_HEADER = "bdnf-wiring v1"
GAME_HEADER = "bdnf-game v1"


class FormatError(ValueError):
    pass


def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def serialize_wiring(w: Wiring) -> str:
    lines = [WIRING_HEADER, f"n={w.n} k={w.k}"]
    for v, row in enumerate(w.out_edges):
        lines.append(f"{v}: " + " ".join(map(str, row)) if row else f"{v}:")
    return "\n".join(lines) + "\n"


def parse_wiring(text: str) -> Wiring:
    it = _content_lines(text)
    try:
        _, head = next(it)
        _, dims = next(it)
    except StopIteration:
        raise FormatError("truncated wiring file") from None
    if head != WIRING_HEADER:
        raise FormatError(f"expected header {WIRING_HEADER!r}, got {head!r}")
    try:
        fields = dict(part.split("=", 1) for part in dims.split())
        n, k = int(fields["n"]), int(fields["k"])
    except (ValueError, KeyError):
        raise FormatError(f"bad size line {dims!r}; expected 'n=<n> k=<k>'") from None
    if n < 1 or k < 0:
        raise FormatError(f"bad sizes n={n} k={k}")
    rows: list[tuple[int, ...] | None] = [None] * n
    for no, line in it:
        node, sep, rest = line.partition(":")
        if not sep:
            raise FormatError(f"line {no}: expected '<id>: <targets>'")
        try:
            v = int(node)
            ts = tuple(int(x) for x in rest.split())
        except ValueError:
            raise FormatError(f"line {no}: non-integer id or target") from None
        if not 0 <= v < n:
            raise FormatError(f"line {no}: node {v} out of range")
        if rows[v] is not None:
            raise FormatError(f"line {no}: node {v} listed twice")
        if v in ts:
            raise FormatError(f"line {no}: self-loop at node {v}")
        if len(set(ts)) != len(ts):
            raise FormatError(f"line {no}: duplicate target at node {v}")
        if any(not 0 <= t < n for t in ts):
            raise FormatError(f"line {no}: target out of range at node {v}")
        if len(ts) > k:
            raise FormatError(f"line {no}: node {v} has {len(ts)} targets but k={k}")
        rows[v] = ts
    return Wiring(n, k, tuple(r if r is not None else () for r in rows))


def _format_num(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def serialize_game(g: GameInstance) -> str:
    if g.is_uniform():
        return f"{GAME_HEADER}\nuniform {g.n} {g.k}\n[penalty]\n{_format_num(g.M)}\n"
    lines = [GAME_HEADER, f"n={g.n}", "[budgets]", " ".join(map(str, g.budgets)), "[weights]"]
    for v, u in zip(*np.nonzero(g.weights)):
        lines.append(f"{v} {u} {_format_num(g.weights[v, u])}")
    full = tuple(u for u in range(g.n))
    if any(g.allowed[v] != tuple(u for u in full if u != v) for v in range(g.n)):
        lines.append("[allowed]")
        lines += [f"{v}: " + " ".join(map(str, a)) for v, a in enumerate(g.allowed)]
    lines += ["[penalty]", _format_num(g.M)]
    return "\n".join(lines) + "\n"


def parse_game(text: str) -> GameInstance:
    it = list(_content_lines(text))
    if not it or it[0][1] != GAME_HEADER:
        raise FormatError(f"expected header {GAME_HEADER!r}")
    body = it[1:]
    if not body:
        raise FormatError("empty game")
    sections: dict[str, list[tuple[int, str]]] = {}
    head: list[tuple[int, str]] = []
    cur = head
    for no, line in body:
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            if name not in ("budgets", "weights", "allowed", "penalty"):
                raise FormatError(f"line {no}: unknown section {line}")
            if name in sections:
                raise FormatError(f"line {no}: section {line} repeated")
            cur = sections[name] = []
        else:
            cur.append((no, line))
    M = None
    if "penalty" in sections:
        if len(sections["penalty"]) != 1:
            raise FormatError("[penalty] holds exactly one number")
        M = float(sections["penalty"][0][1])
    if head and head[0][1].startswith("uniform"):
        parts = head[0][1].split()
        if len(parts) != 3:
            raise FormatError("expected 'uniform <n> <k>'")
        return uniform_game(int(parts[1]), int(parts[2]), M=M)
    if not head or not head[0][1].startswith("n="):
        raise FormatError("expected 'n=<n>' or 'uniform <n> <k>' after the header")
    n = int(head[0][1][2:])
    if "budgets" not in sections or "weights" not in sections:
        raise FormatError("non-uniform game needs [budgets] and [weights]")
    budgets = [int(x) for _, line in sections["budgets"] for x in line.split()]
    if len(budgets) != n:
        raise FormatError(f"[budgets] lists {len(budgets)} values for n={n}")
    w = np.zeros((n, n))
    for no, line in sections["weights"]:
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"line {no}: weight triple is 'v u w'")
        v, u, x = int(parts[0]), int(parts[1]), float(parts[2])
        if not (0 <= v < n and 0 <= u < n):
            raise FormatError(f"line {no}: node out of range")
        w[v, u] = x
    allowed = None
    if "allowed" in sections:
        allowed = [None] * n
        for no, line in sections["allowed"]:
            node, _, rest = line.partition(":")
            allowed[int(node)] = tuple(int(x) for x in rest.split())
        if any(a is None for a in allowed):
            raise FormatError("[allowed] must list every node")
    try:
        return GameInstance.build(w, budgets, allowed, M=M)
    except ValueError as e:
        raise FormatError(str(e)) from None


def read_wiring(path: str | Path) -> Wiring:
    return parse_wiring(Path(path).read_text())


def write_wiring(path: str | Path, w: Wiring) -> None:
    Path(path).write_text(serialize_wiring(w))


def read_game(path: str | Path) -> GameInstance:
    return parse_game(Path(path).read_text())


def write_game(path: str | Path, g: GameInstance) -> None:
    Path(path).write_text(serialize_game(g))


def read_dimacs(path: str | Path) -> CnfFormula:
    return parse_dimacs(Path(path).read_text())
