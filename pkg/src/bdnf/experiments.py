"""Seeded experiment grids: convergence lengths of best-response walks, CSV output."""
from __future__ import annotations

import csv
import io
import os
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .cayley import regular_wiring
from .dynamics import Scheduler, hamiltonian_plus_random, run_walk
from .game import social_cost, uniform_game
from .graph import Wiring

FAMILIES = ("regular", "random", "empty", "file")
CSV_COLUMNS = (
    "n", "k", "trial", "seed", "family", "scheduler",
    "steps", "deviations", "termination", "connectivity_step", "social_cost",
)
# largest n per k for which exact stability checks are offered
ENUMERATION_CAPS = {1: 300, 2: 120, 3: 50, 4: 30, 5: 30}


class CapExceeded(ValueError):
    pass


def check_cap(n: int, k: int) -> None:
    cap = ENUMERATION_CAPS.get(k)
    if cap is None or n > cap:
        caps = ", ".join(f"k={kk}: n<={c}" for kk, c in ENUMERATION_CAPS.items())
        raise CapExceeded(f"(n={n}, k={k}) is outside the exact-check caps ({caps})")


def threads() -> int:
    """Worker count from BDNF_THREADS (default 1)."""
    raw = os.environ.get("BDNF_THREADS", "1")
    try:
        t = int(raw)
    except ValueError:
        raise ValueError(f"BDNF_THREADS must be an integer, got {raw!r}") from None
    return max(1, t)


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid of walks.

    ``family`` picks the start wiring: offsets 1..k (``regular``), a
    Hamiltonian cycle plus k-1 random links (``random``), no links
    (``empty``) or ``wiring_path``.  With ``shuffle_order`` each trial's
    round-robin walk uses its own seeded node order.
    """

    n_range: tuple[int, ...]
    k_range: tuple[int, ...]
    trials: int = 10
    family: str = "regular"
    scheduler: str = "round-robin"
    shuffle_order: bool = True
    seed: int = 0
    step_cap: int = 200_000
    output: str | None = None
    wiring_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_range", tuple(int(x) for x in self.n_range))
        object.__setattr__(self, "k_range", tuple(int(x) for x in self.k_range))
        if not self.n_range or not self.k_range:
            raise ValueError("n_range and k_range must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.family == "file" and not self.wiring_path:
            raise ValueError("family 'file' needs wiring_path")
        Scheduler(self.scheduler)
        if self.step_cap < max(self.n_range) ** 2:
            raise ValueError("step_cap must be at least n^2 for every n in the grid")
        if any(k >= n for n in self.n_range for k in self.k_range):
            raise ValueError("every k must be below every n")

    def cells(self) -> list[tuple[int, int, int]]:
        return [(n, k, t) for n in self.n_range for k in self.k_range for t in range(self.trials)]


def trial_seed(cfg: ExperimentConfig, trial: int) -> int:
    return cfg.seed + trial


def initial_wiring(cfg: ExperimentConfig, n: int, k: int, rng: random.Random) -> Wiring:
    if cfg.family == "regular":
        return regular_wiring(n, range(1, k + 1))
    if cfg.family == "random":
        return hamiltonian_plus_random(n, k, rng)
    if cfg.family == "empty":
        return Wiring.empty(n, k)
    from .io import read_wiring

    w = read_wiring(cfg.wiring_path)
    if (w.n, w.k) != (n, k):
        raise ValueError(f"wiring file is ({w.n},{w.k}), grid cell is ({n},{k})")
    return w


def _scheduler(cfg: ExperimentConfig, n: int, rng: random.Random, seed: int) -> Scheduler:
    order = None
    if cfg.scheduler == "round-robin" and cfg.shuffle_order:
        order = list(range(n))
        rng.shuffle(order)
        order = tuple(order)
    return Scheduler(cfg.scheduler, order, seed)


def run_trial(cfg: ExperimentConfig, n: int, k: int, trial: int) -> dict:
    return _trial(cfg, n, k, trial)[0]


def _trial(cfg: ExperimentConfig, n: int, k: int, trial: int) -> tuple[dict, Wiring]:
    seed = trial_seed(cfg, trial)
    rng = random.Random(f"{cfg.family}:{n}:{k}:{seed}")
    w0 = initial_wiring(cfg, n, k, rng)
    sched = _scheduler(cfg, n, rng, seed)
    g = uniform_game(n, k)
    tr = run_walk(g, w0, sched, max_steps=cfg.step_cap, check_lemmas=False)
    row = {
        "n": n, "k": k, "trial": trial, "seed": seed, "family": cfg.family,
        "scheduler": cfg.scheduler, "steps": tr.steps, "deviations": tr.deviations,
        "termination": tr.termination.kind,
        "connectivity_step": "" if tr.connectivity_step is None else tr.connectivity_step,
        "social_cost": f"{social_cost(g, tr.final):.12g}",
    }
    return row, tr.final


def _run_cell(args):
    return _trial(*args)


def run_convergence_experiment(cfg: ExperimentConfig, workers: int | None = None,
                               finals: list[Wiring] | None = None) -> list[dict]:
    """One row per (n, k, trial) in that order; written to ``cfg.output`` if set.

    If ``finals`` is given, each walk's last wiring is appended to it in row order.
    """
    jobs = [(cfg, n, k, t) for n, k, t in cfg.cells()]
    workers = threads() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_run_cell, jobs))
    else:
        out = [_run_cell(j) for j in jobs]
    rows = [r for r, _ in out]
    if finals is not None:
        finals.extend(w for _, w in out)
    if cfg.output:
        Path(cfg.output).write_text(rows_to_csv(rows))
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    wr.writeheader()
    wr.writerows(rows)
    return buf.getvalue()


def read_rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


@dataclass(frozen=True)
class CellSummary:
    n: int
    k: int
    family: str
    mean_steps: float
    var_steps: float
    all_stable: bool


def summarize(rows: list[dict]) -> list[CellSummary]:
    groups: dict[tuple[int, int, str], list[dict]] = {}
    for r in rows:
        groups.setdefault((int(r["n"]), int(r["k"]), r["family"]), []).append(r)
    out = []
    for (n, k, fam), rs in sorted(groups.items()):
        steps = [int(r["steps"]) for r in rs]
        var = statistics.pvariance(steps) if len(steps) > 1 else 0.0
        out.append(CellSummary(n, k, fam, statistics.fmean(steps), var, all(r["termination"] == "Stable" for r in rs)))
    return out


def variance_comparison(rows: list[dict], a: str = "random", b: str = "regular") -> dict[tuple[int, int], tuple[float, float]]:
    """Per (n, k) cell present in both families: (variance of ``a``, variance of ``b``)."""
    s = {(c.n, c.k, c.family): c.var_steps for c in summarize(rows)}
    cells = sorted({(n, k) for n, k, f in s if f == a} & {(n, k) for n, k, f in s if f == b})
    return {c: (s[c + (a,)], s[c + (b,)]) for c in cells}
