"""Particle swarm operators: velocity rules and neighbourhood topologies.

Velocity functions broadcast over leading axes, so the same function moves one
particle (``x`` of shape ``(n,)``) or a whole swarm (``(M, n)``). Random draws
go through ``rng.uniform`` / ``rng.normal`` only, which keeps them easy to pin
in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import Evaluator, InvalidConfig, Swarm, repair

# velocity strategy codes; "O" (original update with v_max clamp) is not part of
# the enumerated instance space but is available for single runs.
VELOCITY_CODES = ("B", "F", "I", "D")
ALL_VELOCITY_CODES = VELOCITY_CODES + ("O",)

TOPOLOGY_CODES = {
    "L": "lbest",
    "G": "gbest",
    "N": "von_neumann",
    "I": "increasing",
    "M": "dms",
}

DMS_CLUSTER_SIZE = 3
DMS_REGROUP_PERIOD = 5


def constriction(phi: float) -> float:
    """FIPS constriction coefficient; requires ``phi > 4``."""
    if phi <= 4:
        raise InvalidConfig(f"constriction needs phi > 4, got {phi}")
    return 2.0 / (phi - 2.0 + math.sqrt(phi * phi - 4.0 * phi))


@dataclass(frozen=True)
class PsoParams:
    phi1: float = 1.49618
    phi2: float = 1.49618
    phi: float = 4.1
    omega: float = 0.7298
    omega_start: float = 0.9
    omega_end: float = 0.4
    v_max: np.ndarray | None = None

    @property
    def chi(self) -> float:
        return constriction(self.phi)

    def with_bounds(self, lower, upper) -> "PsoParams":
        """Fill in ``v_max`` as half the box width if it was left unset."""
        if self.v_max is not None:
            return self
        return replace(self, v_max=(np.asarray(upper, float) - np.asarray(lower, float)) / 2)


def inertia_weight(strategy: str, progress: float, params: PsoParams) -> float:
    """Inertia for the fixed ("I") or linearly decreasing ("D") strategy.

    ``progress`` is the fraction of the evaluation budget already used.
    """
    if strategy == "I":
        return params.omega
    if strategy == "D":
        progress = min(max(progress, 0.0), 1.0)
        return params.omega_start + (params.omega_end - params.omega_start) * progress
    raise InvalidConfig(f"no inertia weight for velocity strategy {strategy!r}")


def velocity_original(x, v, p, g, params: PsoParams, rng) -> np.ndarray:
    """Velocity of the original PSO, clamped to ``[-v_max, v_max]``."""
    if params.v_max is None:
        raise InvalidConfig("velocity_original needs params.v_max")
    x = np.asarray(x, float)
    u1 = rng.uniform(0.0, params.phi1, size=x.shape)
    u2 = rng.uniform(0.0, params.phi2, size=x.shape)
    new_v = v + u1 * (p - x) + u2 * (g - x)
    return np.clip(new_v, -params.v_max, params.v_max)


def velocity_inertia(x, v, p, g, omega: float, params: PsoParams, rng) -> np.ndarray:
    x = np.asarray(x, float)
    u1 = rng.uniform(0.0, params.phi1, size=x.shape)
    u2 = rng.uniform(0.0, params.phi2, size=x.shape)
    return omega * v + u1 * (p - x) + u2 * (g - x)


def velocity_fips(x, v, neighbor_pbests, params: PsoParams, rng, mask=None) -> np.ndarray:
    """Fully informed velocity update.

    ``neighbor_pbests`` has shape ``(..., K, n)``. When moving a whole swarm,
    pass every personal best with ``mask[..., K]`` selecting each particle's
    neighbours; the average runs over the selected entries only.
    """
    x = np.asarray(x, float)
    nb = np.asarray(neighbor_pbests, float)
    if nb.shape[-2] == 0:
        raise ValueError("FIPS needs at least one neighbour")
    u = rng.uniform(0.0, params.phi, size=np.broadcast_shapes(nb.shape, x[..., None, :].shape))
    pull = u * (nb - x[..., None, :])
    if mask is None:
        count = nb.shape[-2]
        total = pull.sum(axis=-2)
    else:
        mask = np.asarray(mask, bool)
        count = mask.sum(axis=-1)[..., None]
        total = np.where(mask[..., None], pull, 0.0).sum(axis=-2)
    return params.chi * (v + total / count)


def position_barebones(p, g, rng) -> np.ndarray:
    """Gaussian sample with mean ``(p+g)/2`` and per-component variance ``|p-g|``."""
    p = np.asarray(p, float)
    g = np.asarray(g, float)
    return rng.normal((p + g) / 2.0, np.sqrt(np.abs(p - g)))


# -- topologies -------------------------------------------------------------

def ring_adjacency(M: int, radius: int = 1) -> np.ndarray:
    """Ring where each particle sees itself and ``radius`` neighbours per side."""
    idx = np.arange(M)
    dist = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(dist, M - dist)
    return dist <= radius


def grid_shape(M: int) -> tuple[int, int]:
    """Most square ``rows x cols`` factorisation of ``M`` (rows <= cols)."""
    rows = int(math.isqrt(M))
    while M % rows:
        rows -= 1
    return rows, M // rows


def von_neumann_adjacency(M: int) -> np.ndarray:
    rows, cols = grid_shape(M)
    adj = np.eye(M, dtype=bool)
    for i in range(M):
        r, c = divmod(i, cols)
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            j = ((r + dr) % rows) * cols + (c + dc) % cols
            adj[i, j] = True
    return adj


def dms_cluster_sizes(M: int) -> list[int]:
    n_clusters = max(M // DMS_CLUSTER_SIZE, 1)
    return [DMS_CLUSTER_SIZE] * (n_clusters - 1) + [M - DMS_CLUSTER_SIZE * (n_clusters - 1)]


def dms_adjacency(M: int, rng) -> np.ndarray:
    perm = rng.permutation(M)
    adj = np.zeros((M, M), dtype=bool)
    start = 0
    for size in dms_cluster_sizes(M):
        members = perm[start:start + size]
        adj[np.ix_(members, members)] = True
        start += size
    return adj


def increasing_radius(M: int, progress: float) -> int:
    """Ring radius for the increasing topology: 1 at the start, full ring at the end."""
    full = M // 2
    progress = min(max(progress, 0.0), 1.0)
    return min(full, 1 + int(progress * full))


class Topology:
    """Neighbourhood structure of a swarm.

    ``kind`` is one of ``lbest``, ``gbest``, ``von_neumann``, ``increasing``,
    ``dms`` (or the one-letter instance codes). Call :meth:`update` once per
    generation; it returns the ``(M, M)`` boolean adjacency with self-loops.
    """

    def __init__(self, kind: str, M: int):
        kind = TOPOLOGY_CODES.get(kind, kind)
        if kind not in TOPOLOGY_CODES.values():
            raise InvalidConfig(f"unknown topology {kind!r}")
        if M < 5:
            raise InvalidConfig("topologies need M >= 5")
        self.kind = kind
        self.M = M
        self.iteration = 0
        self._adj = None

    def update(self, progress: float = 0.0, rng=None) -> np.ndarray:
        M = self.M
        if self.kind == "lbest":
            adj = self._adj if self._adj is not None else ring_adjacency(M, 1)
        elif self.kind == "gbest":
            adj = self._adj if self._adj is not None else np.ones((M, M), dtype=bool)
        elif self.kind == "von_neumann":
            adj = self._adj if self._adj is not None else von_neumann_adjacency(M)
        elif self.kind == "increasing":
            adj = ring_adjacency(M, increasing_radius(M, progress))
        else:
            if self.iteration % DMS_REGROUP_PERIOD == 0 or self._adj is None:
                if rng is None:
                    raise InvalidConfig("the dms topology needs an rng to regroup")
                adj = dms_adjacency(M, rng)
            else:
                adj = self._adj
        self._adj = adj
        self.iteration += 1
        return adj


def neighbor_sets(adj: np.ndarray) -> list[set[int]]:
    return [set(np.flatnonzero(row).tolist()) for row in adj]


def neighborhood_best(adj: np.ndarray, f_best: np.ndarray) -> np.ndarray:
    """Index of the best personal best in each neighbourhood (lowest index on ties)."""
    return np.where(adj, f_best[None, :], np.inf).argmin(axis=1)


def move(swarm: Swarm, adj: np.ndarray, strategy: str, params: PsoParams,
         progress: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Unrepaired new positions and velocities for every particle."""
    x, v, p = swarm.x, swarm.v, swarm.p
    if strategy == "F":
        new_v = velocity_fips(x, v, p[None, :, :], params, rng, mask=adj)
        return x + new_v, new_v
    g = p[neighborhood_best(adj, swarm.f_best)]
    if strategy == "B":
        return position_barebones(p, g, rng), v.copy()
    if strategy in ("I", "D"):
        new_v = velocity_inertia(x, v, p, g, inertia_weight(strategy, progress, params), params, rng)
    elif strategy == "O":
        new_v = velocity_original(x, v, p, g, params, rng)
    else:
        raise InvalidConfig(f"unknown velocity strategy {strategy!r}")
    return x + new_v, new_v


def pso_moved(swarm: Swarm, adj: np.ndarray, strategy: str, params: PsoParams,
              evaluator: Evaluator, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Move, repair and evaluate; returns ``(x, v, f)`` without touching ``swarm``."""
    x_new, v_new = move(swarm, adj, strategy, params, evaluator.budget.fraction, rng)
    x_new, clamped = repair(x_new, evaluator.problem)
    v_new[clamped] = 0.0
    f_new = evaluator(x_new)
    return x_new, v_new, f_new


def pso_step(swarm: Swarm, topology: Topology, strategy: str, params: PsoParams,
             evaluator: Evaluator, rng) -> Swarm:
    """One synchronous PSO generation (M evaluations).

    If the budget runs out mid-generation the input swarm is left untouched
    and ``BudgetExhausted`` propagates.
    """
    params = params.with_bounds(evaluator.problem.lower, evaluator.problem.upper)
    adj = topology.update(evaluator.budget.fraction, rng)
    x_new, v_new, f_new = pso_moved(swarm, adj, strategy, params, evaluator, rng)
    improved = f_new < swarm.f_best
    p = np.where(improved[:, None], x_new, swarm.p)
    f_best = np.where(improved, f_new, swarm.f_best)
    return Swarm(x_new, v_new, p, f_best, f_new)
