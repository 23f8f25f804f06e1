"""Problem model, evaluation budget, population container and RNG helpers.

Everything here is shared by the PSO, DE and hybrid loops. Populations are
stored as a struct of arrays (one row per particle) so that the algorithm
modules can update a whole swarm with a handful of numpy calls.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MIN_POPULATION = 5


class InvalidConfig(ValueError):
    """Raised for inconsistent algorithm settings (population size, instance spec...)."""


class BudgetExhausted(Exception):
    """The evaluation budget is spent; the current run must stop."""


@dataclass(frozen=True, eq=False)
class Problem:
    """Box-constrained minimisation problem.

    ``objective`` maps a vector of length ``dim`` to a float. If ``vectorized``
    is true it must also accept a ``(k, dim)`` matrix and return ``k`` values,
    which lets a generation be evaluated in one call.
    """

    objective: Callable[[np.ndarray], float]
    lower: np.ndarray
    upper: np.ndarray
    f_opt: float = 0.0
    vectorized: bool = False
    name: str = ""

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).ravel()
        upper = np.asarray(self.upper, dtype=float).ravel()
        if lower.shape != upper.shape or lower.size == 0:
            raise InvalidConfig("lower and upper bounds must be non-empty and of equal length")
        if not np.all(lower < upper):
            raise InvalidConfig("every lower bound must be strictly below its upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    def evaluate_rows(self, X: np.ndarray) -> np.ndarray:
        """Objective values for every row of ``X`` (no budget accounting)."""
        X = np.atleast_2d(X)
        if self.vectorized:
            return np.asarray(self.objective(X), dtype=float).reshape(len(X))
        return np.fromiter((self.objective(row) for row in X), dtype=float, count=len(X))


@dataclass
class Budget:
    max_evals: int
    used: int = 0

    def __post_init__(self):
        if self.max_evals < 1:
            raise InvalidConfig("max_evals must be positive")
        if not 0 <= self.used <= self.max_evals:
            raise InvalidConfig("used must lie in [0, max_evals]")

    @property
    def remaining(self) -> int:
        return self.max_evals - self.used

    @property
    def fraction(self) -> float:
        """Share of the budget already spent, in [0, 1]."""
        return self.used / self.max_evals

    @property
    def exhausted(self) -> bool:
        return self.used >= self.max_evals


def evaluate(problem: Problem, x: np.ndarray, budget: Budget) -> float:
    """Evaluate a single point, charging one evaluation to ``budget``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise ValueError(f"expected a vector of length {problem.dim}, got shape {x.shape}")
    if budget.exhausted:
        raise BudgetExhausted
    value = float(problem.evaluate_rows(x[None, :])[0])
    budget.used += 1
    return value


class Evaluator:
    """Budget-aware batch evaluation that remembers every objective value.

    The algorithm loops only ever evaluate through an ``Evaluator``; its
    ``history`` is the per-evaluation fitness trace used for best-so-far
    trajectories and target hitting times.
    """

    def __init__(self, problem: Problem, budget: Budget):
        self.problem = problem
        self.budget = budget
        self._history = np.empty(budget.max_evals)
        self._start = budget.used
        self.best_f = np.inf
        self.best_x = None

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """Evaluate the rows of ``X`` in order.

        If the budget runs out part-way, the affordable prefix is still
        evaluated and logged before ``BudgetExhausted`` is raised.
        """
        X = np.atleast_2d(X)
        k = min(len(X), self.budget.remaining)
        if k == 0:
            raise BudgetExhausted
        f = self.problem.evaluate_rows(X[:k])
        pos = self.budget.used - self._start
        self._history[pos:pos + k] = f
        self.budget.used += k
        i = int(np.argmin(f))
        if f[i] < self.best_f:
            self.best_f = float(f[i])
            self.best_x = X[i].copy()
        if k < len(X):
            raise BudgetExhausted
        return f

    @property
    def history(self) -> np.ndarray:
        return self._history[: self.budget.used - self._start]


@dataclass
class Particle:
    """Single-particle view: position, velocity and personal-best memory."""

    x: np.ndarray
    v: np.ndarray
    p: np.ndarray
    f_best: float = np.inf
    f_cur: float = np.inf


@dataclass
class Swarm:
    """Population of ``M`` particles stored row-wise.

    ``x``, ``v`` and ``p`` have shape ``(M, n)``; ``f_best`` and ``f_cur``
    have shape ``(M,)``. DE populations keep ``p == x``.
    """

    x: np.ndarray
    v: np.ndarray
    p: np.ndarray
    f_best: np.ndarray
    f_cur: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.f_cur is None:
            self.f_cur = np.full(len(self.x), np.inf)

    @property
    def M(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def __len__(self):
        return self.M

    def particle(self, i: int) -> Particle:
        return Particle(self.x[i].copy(), self.v[i].copy(), self.p[i].copy(),
                        float(self.f_best[i]), float(self.f_cur[i]))

    @property
    def members(self) -> list[Particle]:
        return [self.particle(i) for i in range(self.M)]

    def copy(self) -> "Swarm":
        return Swarm(self.x.copy(), self.v.copy(), self.p.copy(),
                     self.f_best.copy(), self.f_cur.copy())

    def take(self, idx: np.ndarray) -> "Swarm":
        """New swarm made of the rows ``idx`` (copies)."""
        return Swarm(self.x[idx], self.v[idx], self.p[idx], self.f_best[idx], self.f_cur[idx])

    def best_index(self) -> int:
        return int(np.argmin(self.f_best))


def init_population(problem: Problem, M: int, rng: np.random.Generator) -> Swarm:
    """Uniform random positions in the box, zero velocities, unevaluated memory."""
    if M < MIN_POPULATION:
        raise InvalidConfig(f"population size must be at least {MIN_POPULATION}, got {M}")
    x = rng.uniform(problem.lower, problem.upper, size=(M, problem.dim))
    return Swarm(x=x, v=np.zeros_like(x), p=x.copy(), f_best=np.full(M, np.inf))


def evaluate_swarm(swarm: Swarm, evaluator: Evaluator) -> None:
    """First evaluation of a fresh swarm; sets ``f_cur`` and personal bests."""
    f = evaluator(swarm.x)
    swarm.f_cur = f.copy()
    swarm.p = swarm.x.copy()
    swarm.f_best = f.copy()


def repair(x: np.ndarray, problem: Problem) -> tuple[np.ndarray, np.ndarray]:
    """Clamp ``x`` (a vector or a matrix of row vectors) into the box.

    Returns the clamped copy and a boolean mask of the components that moved.
    """
    x = np.asarray(x, dtype=float)
    clamped = np.clip(x, problem.lower, problem.upper)
    return clamped, clamped != x


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_seed(master_seed: int, *keys) -> int:
    """Stable 64-bit seed for one run, independent of process or scheduling."""
    text = "|".join([str(master_seed), *map(str, keys)])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")
