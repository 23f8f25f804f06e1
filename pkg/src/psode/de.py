"""Differential evolution operators and JADE parameter adaptation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Evaluator, InvalidConfig, Swarm, repair

# mutation codes used in instance names; "R1" (DE/rand/1) is available but is
# not part of the default enumeration.
MUTATION_CODES = ("B1", "B2", "T1", "PB", "O1")
ALL_MUTATION_CODES = MUTATION_CODES + ("R1",)
CROSSOVER_CODES = ("B", "E")

_MUTATION_ALIASES = {
    "rand1": "R1",
    "best1": "B1",
    "best2": "B2",
    "t2best1": "T1",
    "t2pbest1": "PB",
    "twoopt1": "O1",
}

# number of distinct random indices (besides the target) each mutation draws
_N_RANDOM = {"R1": 3, "B1": 2, "B2": 4, "T1": 2, "PB": 2, "O1": 3}

P_TOP = 0.1


def mutation_code(kind: str) -> str:
    code = _MUTATION_ALIASES.get(kind, kind)
    if code not in _N_RANDOM:
        raise InvalidConfig(f"unknown mutation {kind!r}")
    return code


def draw_indices(rng, M: int, targets: np.ndarray, k: int) -> np.ndarray:
    """``k`` distinct indices per target, all different from the target itself.

    Uniform without replacement: sort random keys with the target's own key
    pushed to the end.
    """
    if k > M - 1:
        raise InvalidConfig(f"need {k} distinct partners but population has only {M}")
    keys = rng.random((len(targets), M))
    keys[np.arange(len(targets)), targets] = np.inf
    return np.argsort(keys, axis=1)[:, :k]


def top_set_size(M: int, p_top: float) -> int:
    return max(1, math.ceil(p_top * M))


def mutate(kind: str, i, population, fitnesses, F, p_top: float = P_TOP, rng=None) -> np.ndarray:
    """Donor vector(s) for target index ``i``.

    ``i`` may be a single index (returns a vector) or an array of indices
    (returns one donor per row); ``F`` is a scalar or one value per target.
    """
    code = mutation_code(kind)
    X = np.asarray(population, float)
    f = np.asarray(fitnesses, float)
    M = len(X)
    scalar = np.ndim(i) == 0
    targets = np.atleast_1d(np.asarray(i, dtype=int))
    F = np.broadcast_to(np.asarray(F, float), targets.shape)[:, None]

    r = draw_indices(rng, M, targets, _N_RANDOM[code])
    xr = X[r]  # (k, n_random, n)
    if code == "R1":
        donor = xr[:, 0] + F * (xr[:, 1] - xr[:, 2])
    elif code == "B1":
        donor = X[np.argmin(f)] + F * (xr[:, 0] - xr[:, 1])
    elif code == "B2":
        donor = X[np.argmin(f)] + F * (xr[:, 0] - xr[:, 1]) + F * (xr[:, 2] - xr[:, 3])
    elif code == "T1":
        xi = X[targets]
        donor = xi + F * (X[np.argmin(f)] - xi) + F * (xr[:, 0] - xr[:, 1])
    elif code == "PB":
        top = np.argsort(f, kind="stable")[: top_set_size(M, p_top)]
        pbest = top[rng.integers(0, len(top), size=len(targets))]
        xi = X[targets]
        donor = xi + F * (X[pbest] - xi) + F * (xr[:, 0] - xr[:, 1])
    else:  # O1
        first = (f[r[:, 0]] < f[r[:, 1]])[:, None]
        base = np.where(first, xr[:, 0], xr[:, 1])
        other = np.where(first, xr[:, 1], xr[:, 0])
        donor = base + F * (other - xr[:, 2])
    return donor[0] if scalar else donor


def _as_rows(target, donor, Cr):
    target = np.asarray(target, float)
    donor = np.asarray(donor, float)
    scalar = target.ndim == 1
    t2 = np.atleast_2d(target)
    d2 = np.atleast_2d(donor)
    Cr = np.broadcast_to(np.asarray(Cr, float), (len(t2),))[:, None]
    return scalar, t2, d2, Cr


def crossover_binomial(target, donor, Cr, rng) -> np.ndarray:
    """Binomial crossover; ``target``/``donor`` are vectors or row matrices."""
    scalar, t, d, Cr = _as_rows(target, donor, Cr)
    k, n = t.shape
    take = rng.random((k, n)) <= Cr
    take[np.arange(k), rng.integers(0, n, size=k)] = True
    trial = np.where(take, d, t)
    return trial[0] if scalar else trial


def exponential_run_length(Cr, n: int, rng, size: int | None = None) -> np.ndarray:
    """Number of consecutive donor components for exponential crossover.

    Counts as the do-while loop does: one component, plus one more for every
    leading uniform draw ``<= Cr``; the loop also stops once the count passes
    ``n``, and the result is capped at ``n``.
    """
    k = 1 if size is None else size
    Cr = np.broadcast_to(np.asarray(Cr, float), (k,))[:, None]
    draws = rng.random((k, n)) <= Cr
    q = 1 + np.cumprod(draws, axis=1).sum(axis=1)
    q = np.minimum(q, n)
    return int(q[0]) if size is None else q


def exponential_mask(start, q, n: int) -> np.ndarray:
    """Boolean ``(k, n)`` mask of indices ``start, start+1, ..., start+q-1`` (mod n)."""
    start = np.atleast_1d(start)
    q = np.atleast_1d(q)
    offset = (np.arange(n)[None, :] - start[:, None]) % n
    return offset < q[:, None]


def crossover_exponential(target, donor, Cr, rng) -> np.ndarray:
    """Exponential crossover: a contiguous (wrapping) block comes from the donor."""
    scalar, t, d, Cr = _as_rows(target, donor, Cr)
    k, n = t.shape
    start = rng.integers(0, n, size=k)
    q = exponential_run_length(Cr[:, 0], n, rng, size=k)
    trial = np.where(exponential_mask(start, q, n), d, t)
    return trial[0] if scalar else trial


def crossover(kind: str, target, donor, Cr, rng) -> np.ndarray:
    if kind == "B":
        return crossover_binomial(target, donor, Cr, rng)
    if kind == "E":
        return crossover_exponential(target, donor, Cr, rng)
    raise InvalidConfig(f"unknown crossover {kind!r}")


@dataclass
class AdaptiveParams:
    """JADE state: location parameters for F and Cr and this generation's successes."""

    mu_F: float = 0.5
    mu_Cr: float = 0.5
    c: float = 0.1
    success_F: list = field(default_factory=list)
    success_Cr: list = field(default_factory=list)

    def record(self, F, Cr) -> None:
        self.success_F.extend(np.atleast_1d(F).tolist())
        self.success_Cr.extend(np.atleast_1d(Cr).tolist())


def lehmer_mean(values) -> float:
    values = np.asarray(values, float)
    return float(np.sum(values ** 2) / np.sum(values))


def jade_sample(params: AdaptiveParams, rng, size: int | None = None):
    """Draw ``(F, Cr)``: F ~ Cauchy(mu_F, 0.1) resampled while <= 0 and cut at 1,
    Cr ~ Normal(mu_Cr, 0.1) clipped to [0, 1]."""
    k = 1 if size is None else size
    F = params.mu_F + 0.1 * rng.standard_cauchy(k)
    bad = F <= 0
    while bad.any():
        F[bad] = params.mu_F + 0.1 * rng.standard_cauchy(int(bad.sum()))
        bad = F <= 0
    F = np.minimum(F, 1.0)
    Cr = np.clip(rng.normal(params.mu_Cr, 0.1, size=k), 0.0, 1.0)
    if size is None:
        return float(F[0]), float(Cr[0])
    return F, Cr


def jade_update(params: AdaptiveParams) -> AdaptiveParams:
    """Move mu_F / mu_Cr toward this generation's successes and clear the lists.

    Updates ``params`` in place and returns it.
    """
    c = params.c
    if params.success_F:
        params.mu_F = float(np.clip((1 - c) * params.mu_F + c * lehmer_mean(params.success_F), 0.0, 1.0))
    if params.success_Cr:
        params.mu_Cr = float(np.clip((1 - c) * params.mu_Cr + c * np.mean(params.success_Cr), 0.0, 1.0))
    params.success_F.clear()
    params.success_Cr.clear()
    return params


def de_trials(swarm: Swarm, mutation: str, crossover_kind: str, F, Cr, p_top: float,
              problem, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Trial vectors for every member: ``(raw, repaired, clamped_mask)``."""
    idx = np.arange(swarm.M)
    donors = mutate(mutation, idx, swarm.x, swarm.f_cur, F, p_top, rng)
    trials = crossover(crossover_kind, swarm.x, donors, Cr, rng)
    repaired, clamped = repair(trials, problem)
    return trials, repaired, clamped


def de_step(swarm: Swarm, mutation: str, crossover_kind: str, adaptive: AdaptiveParams,
            evaluator: Evaluator, rng, p_top: float = P_TOP) -> Swarm:
    """One synchronous DE generation with JADE adaptation (M evaluations).

    Every trial is built from the population as it stood at the start of
    the generation; a trial replaces its target only if strictly better.
    """
    F, Cr = jade_sample(adaptive, rng, size=swarm.M)
    _, trials, _ = de_trials(swarm, mutation, crossover_kind, F, Cr, p_top,
                               evaluator.problem, rng)
    f_trial = evaluator(trials)
    better = f_trial < swarm.f_cur
    adaptive.record(F[better], Cr[better])
    jade_update(adaptive)
    x = np.where(better[:, None], trials, swarm.x)
    f = np.where(better, f_trial, swarm.f_cur)
    return Swarm(x, np.zeros_like(x), x.copy(), f.copy(), f)
