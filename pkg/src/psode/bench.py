"""Desk-scale benchmark suite and performance measures (ERT, ranks, ECDF).

The suite has ten shifted test functions, two for each of the five classic
BBOB function groups, on the box [-5, 5]^n with optimum value 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import rankdata

from .core import Problem

GROUPS = {
    1: "separable",
    2: "low or moderate conditioning",
    3: "high conditioning and unimodal",
    4: "multi-modal with adequate global structure",
    5: "multi-modal with weak global structure",
}

BOUND = 5.0
TARGET_EXPONENTS = tuple(range(1, -9, -1))  # 10^1 ... 10^-8
N_TARGETS = len(TARGET_EXPONENTS)


class MissingData(LookupError):
    """Result grid is incomplete for the requested aggregation."""


# -- test functions (z = x - shift, rows broadcast over leading axes) ---------

def _weights(n: int, exponent: float) -> np.ndarray:
    if n == 1:
        return np.ones(1)
    return np.arange(n) / (n - 1) * exponent


def sphere(z):
    return np.sum(z ** 2, axis=-1)


def ellipsoid(z):
    return np.sum(10.0 ** _weights(z.shape[-1], 6.0) * z ** 2, axis=-1)


def attractive_sector(z):
    s = np.where(z > 0, 100.0, 1.0)
    return np.sum((s * z) ** 2, axis=-1)


def rosenbrock(z):
    y = z + 1.0
    return np.sum(100.0 * (y[..., :-1] ** 2 - y[..., 1:]) ** 2 + (y[..., :-1] - 1.0) ** 2, axis=-1)


def bent_cigar(z):
    return z[..., 0] ** 2 + 1e6 * np.sum(z[..., 1:] ** 2, axis=-1)


def different_powers(z):
    return np.sum(np.abs(z) ** (2.0 + _weights(z.shape[-1], 4.0)), axis=-1)


def rastrigin(z):
    return np.sum(z ** 2 - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=-1)


def griewank(z):
    i = np.arange(1, z.shape[-1] + 1)
    return 1.0 + np.sum(z ** 2, axis=-1) / 4000.0 - np.prod(np.cos(z / np.sqrt(i)), axis=-1)


def schaffer_f7(z):
    s = np.sqrt(z[..., :-1] ** 2 + z[..., 1:] ** 2)
    inner = np.sqrt(s) + np.sqrt(s) * np.sin(50.0 * s ** 0.2) ** 2
    return np.mean(inner, axis=-1) ** 2


# Schwefel's deceptive landscape, mapped so the optimum sits at z = 0.
_SCHWEFEL_Y = 420.968746359982
_SCHWEFEL_C = _SCHWEFEL_Y * math.sin(math.sqrt(_SCHWEFEL_Y))
_SCHWEFEL_SCALE = 100.0


def schwefel(z):
    y = _SCHWEFEL_Y + _SCHWEFEL_SCALE * z
    terms = _SCHWEFEL_C - y * np.sin(np.sqrt(np.abs(y)))
    penalty = np.maximum(np.abs(y) - 500.0, 0.0) ** 2
    return np.sum(terms + penalty, axis=-1)


_CATALOGUE = [
    (1, "sphere", 1, sphere),
    (2, "ellipsoid", 1, ellipsoid),
    (3, "attractive_sector", 2, attractive_sector),
    (4, "rosenbrock", 2, rosenbrock),
    (5, "bent_cigar", 3, bent_cigar),
    (6, "different_powers", 3, different_powers),
    (7, "rastrigin", 4, rastrigin),
    (8, "griewank", 4, griewank),
    (9, "schaffer_f7", 5, schaffer_f7),
    (10, "schwefel", 5, schwefel),
]
FUNCTION_IDS = tuple(fid for fid, *_ in _CATALOGUE)
FUNCTION_GROUP = {fid: group for fid, _, group, _ in _CATALOGUE}


@dataclass(frozen=True, eq=False)
class TestFunction:
    id: int
    name: str
    group: int
    shift: np.ndarray
    definition: Callable[[np.ndarray], np.ndarray]
    f_opt: float = 0.0

    __test__ = False  # not a pytest class

    def __call__(self, x):
        return self.definition(np.asarray(x, float) - self.shift) + self.f_opt

    @property
    def dim(self) -> int:
        return self.shift.size

    def problem(self) -> Problem:
        n = self.dim
        return Problem(self, np.full(n, -BOUND), np.full(n, BOUND), f_opt=self.f_opt,
                       vectorized=True, name=self.name)


def function_shift(fid: int, dim: int) -> np.ndarray:
    """Fixed optimum location inside the central 80% of the box."""
    rng = np.random.default_rng([fid, dim, 20200101])
    return rng.uniform(-0.8 * BOUND, 0.8 * BOUND, size=dim)


def get_function(fid: int, dim: int) -> TestFunction:
    for cid, name, group, definition in _CATALOGUE:
        if cid == fid:
            return TestFunction(cid, name, group, function_shift(cid, dim), definition)
    raise KeyError(f"no test function with id {fid}")


def suite(dim: int) -> list[TestFunction]:
    if dim < 2:
        raise ValueError("the suite needs dim >= 2")
    return [get_function(fid, dim) for fid in FUNCTION_IDS]


def targets(f_opt: float = 0.0) -> np.ndarray:
    """The ten target values ``f_opt + 10^k`` for ``k = 1, 0, ..., -8``."""
    return f_opt + 10.0 ** np.asarray(TARGET_EXPONENTS, float)


# -- run records ------------------------------------------------------------

@dataclass
class RunRecord:
    instance: str
    function_id: int
    dim: int
    run_index: int
    seed: int
    hits: list = field(default_factory=lambda: [None] * N_TARGETS)
    total_evals: int = 0
    final_best: float = math.inf

    def key(self):
        return (self.instance, self.function_id, self.dim, self.run_index)


def hitting_times(history, target_values) -> list:
    """First evaluation count at which each target is reached (``None`` if never)."""
    best = np.minimum.accumulate(np.asarray(history, float))
    hits = []
    for t in target_values:
        reached = np.flatnonzero(best <= t)
        hits.append(int(reached[0]) + 1 if reached.size else None)
    return hits


def ert(records: list[RunRecord], target_index: int) -> float:
    """Expected running time for one target; ``inf`` when no run hit it."""
    if not records:
        raise ValueError("ert needs at least one record")
    spent = 0
    successes = 0
    for rec in records:
        hit = rec.hits[target_index]
        if hit is None:
            spent += rec.total_evals
        else:
            spent += hit
            successes += 1
    return spent / successes if successes else math.inf


def ert_table(records: list[RunRecord]) -> dict:
    """``{(instance, function_id, target_index): ERT}`` over all records."""
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.instance, rec.function_id), []).append(rec)
    return {(inst, fid, t): ert(recs, t)
            for (inst, fid), recs in groups.items() for t in range(N_TARGETS)}


def rank_instances(table: dict) -> list[tuple[str, float]]:
    """Average rank of every instance, best first.

    Instances are ranked per (function, target) by ERT with ties averaged
    (infinite ERTs tie at the bottom), averaged over targets per function,
    then over functions.
    """
    instances = sorted({k[0] for k in table})
    cells = sorted({k[1:] for k in table})
    missing = [(i, f, t) for i in instances for f, t in cells if (i, f, t) not in table]
    if missing:
        raise MissingData(f"ERT table misses {len(missing)} cells, e.g. {missing[:3]}")
    functions = sorted({f for f, _ in cells})
    per_function = {f: np.zeros(len(instances)) for f in functions}
    n_targets = {f: 0 for f in functions}
    for f, t in cells:
        values = np.array([table[(i, f, t)] for i in instances])
        per_function[f] += rankdata(values, method="average")
        n_targets[f] += 1
    avg = np.mean([per_function[f] / n_targets[f] for f in functions], axis=0)
    order = sorted(range(len(instances)), key=lambda k: (avg[k], instances[k]))
    return [(instances[k], float(avg[k])) for k in order]


def ecdf(records: list[RunRecord], eval_grid) -> list[tuple[float, float]]:
    """Fraction of (run, target) pairs hit within each evaluation count of the grid."""
    if not records:
        raise ValueError("ecdf needs at least one record")
    hits = np.array([h if h is not None else np.inf for rec in records for h in rec.hits], float)
    hits.sort()
    grid = np.asarray(eval_grid, float)
    counts = np.searchsorted(hits, grid, side="right")
    return list(zip(grid.tolist(), (counts / hits.size).tolist()))


def log_grid(max_evals: int, points: int = 50) -> np.ndarray:
    return np.logspace(0.0, math.log10(max_evals), points)
