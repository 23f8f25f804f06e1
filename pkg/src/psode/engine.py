"""Run loops for PSO, DE and the PSODE hybrid, plus the instance naming codec.

Instance names follow three templates::

    P_<velocity>_<topology>
    D_<mutation>_<crossover>
    H_<velocity>_<topology>_<mutation>_<crossover>_<selection>
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Budget,
    BudgetExhausted,
    Evaluator,
    InvalidConfig,
    Problem,
    Swarm,
    evaluate_swarm,
    init_population,
    make_rng,
)
from .de import (
    ALL_MUTATION_CODES,
    CROSSOVER_CODES,
    MUTATION_CODES,
    P_TOP,
    AdaptiveParams,
    de_step,
    de_trials,
    jade_sample,
    jade_update,
)
from .pso import (
    ALL_VELOCITY_CODES,
    TOPOLOGY_CODES,
    VELOCITY_CODES,
    PsoParams,
    Topology,
    pso_moved,
    pso_step,
)

PSO, DE, HYBRID = "PSO", "DE", "HYBRID"
KIND_PREFIX = {PSO: "P", DE: "D", HYBRID: "H"}

# selection code -> (comparison, number of populations considered)
SELECTION_CODES = {
    "U2": ("union", 2),
    "U3": ("union", 3),
    "P2": ("pairwise", 2),
    "P3": ("pairwise", 3),
}

_FIELDS = {
    PSO: ("velocity", "topology"),
    DE: ("mutation", "crossover"),
    HYBRID: ("velocity", "topology", "mutation", "crossover", "selection"),
}


class ParseError(InvalidConfig):
    def __init__(self, name: str, token: str, reason: str = "invalid code"):
        super().__init__(f"cannot parse instance name {name!r}: {reason} at token {token!r}")
        self.name = name
        self.token = token


def _allowed(field_name: str, extended: bool):
    return {
        "velocity": ALL_VELOCITY_CODES if extended else VELOCITY_CODES,
        "topology": tuple(TOPOLOGY_CODES),
        "mutation": ALL_MUTATION_CODES if extended else MUTATION_CODES,
        "crossover": CROSSOVER_CODES,
        "selection": tuple(SELECTION_CODES),
    }[field_name]


@dataclass(frozen=True)
class InstanceSpec:
    """One algorithm instance: its kind and the chosen option of each module."""

    kind: str
    velocity: str | None = None
    topology: str | None = None
    mutation: str | None = None
    crossover: str | None = None
    selection: str | None = None

    def __post_init__(self):
        if self.kind not in _FIELDS:
            raise InvalidConfig(f"unknown instance kind {self.kind!r}")
        used = _FIELDS[self.kind]
        for name in ("velocity", "topology", "mutation", "crossover", "selection"):
            value = getattr(self, name)
            if name in used:
                if value not in _allowed(name, extended=True):
                    raise InvalidConfig(f"{self.kind} instance needs a valid {name}, got {value!r}")
            elif value is not None:
                raise InvalidConfig(f"{self.kind} instance must not set {name}")

    @property
    def name(self) -> str:
        return render(self)

    def __str__(self):
        return self.name


def render(spec: InstanceSpec) -> str:
    parts = [KIND_PREFIX[spec.kind]] + [getattr(spec, f) for f in _FIELDS[spec.kind]]
    return "_".join(parts)


def parse_name(name: str, extended: bool = False) -> InstanceSpec:
    """Parse ``P_F_N``, ``D_T1_B`` or ``H_I_G_PB_B_P3`` style names.

    With ``extended=True`` the non-enumerated options (original velocity
    ``O`` and DE/rand/1 ``R1``) are accepted too.
    """
    tokens = name.strip().split("_")
    kind = {v: k for k, v in KIND_PREFIX.items()}.get(tokens[0])
    if kind is None:
        raise ParseError(name, tokens[0], "unknown instance prefix")
    fields = _FIELDS[kind]
    values = tokens[1:]
    for field_name, token in zip(fields, values):
        if token not in _allowed(field_name, extended):
            raise ParseError(name, token, f"invalid {field_name} code")
    if len(values) != len(fields):
        token = values[len(fields)] if len(values) > len(fields) else "<end>"
        raise ParseError(name, token, f"expected {len(fields)} module codes, got {len(values)}")
    return InstanceSpec(kind, **dict(zip(fields, values)))


def enumerate_instances(kinds=(PSO, DE, HYBRID), extended: bool = False) -> list[InstanceSpec]:
    """All instances of the requested kinds, PSO first, then DE, then hybrids."""
    velocities = ALL_VELOCITY_CODES if extended else VELOCITY_CODES
    mutations = ALL_MUTATION_CODES if extended else MUTATION_CODES
    specs = []
    if PSO in kinds:
        specs += [InstanceSpec(PSO, velocity=v, topology=t)
                  for v, t in itertools.product(velocities, TOPOLOGY_CODES)]
    if DE in kinds:
        specs += [InstanceSpec(DE, mutation=m, crossover=c)
                  for m, c in itertools.product(mutations, CROSSOVER_CODES)]
    if HYBRID in kinds:
        specs += [InstanceSpec(HYBRID, v, t, m, c, s)
                  for v, t, m, c, s in itertools.product(
                      velocities, TOPOLOGY_CODES, mutations, CROSSOVER_CODES, SELECTION_CODES)]
    return specs


# -- selection --------------------------------------------------------------

def select_indices(code: str, f0, f1, f3) -> tuple[np.ndarray, np.ndarray]:
    """Survivors as ``(source, index)`` pairs; source 0, 1, 2 stands for P0, P1, P3.

    Pairwise picks the best of the i-th members of the considered populations;
    union keeps the M best of their union. Ties go to the earlier population
    (P0 before P1 before P3), then the lower index.
    """
    if code not in SELECTION_CODES:
        raise InvalidConfig(f"unknown selection {code!r}")
    comparison, arity = SELECTION_CODES[code]
    pops = [np.asarray(f, float) for f in (f0, f1, f3)]
    M = len(pops[0])
    if any(len(f) != M for f in pops):
        raise InvalidConfig("selection needs populations of equal size")
    sources = [0, 1, 2] if arity == 3 else [1, 2]
    stacked = np.stack([pops[s] for s in sources])
    if comparison == "pairwise":
        pick = np.argmin(stacked, axis=0)
        return np.asarray(sources)[pick], np.arange(M)
    fit = stacked.ravel()
    src = np.repeat(sources, M)
    idx = np.tile(np.arange(M), len(sources))
    order = np.lexsort((idx, src, fit))[:M]
    return src[order], idx[order]


def _gather(pops: list[Swarm], src: np.ndarray, idx: np.ndarray) -> Swarm:
    def pick(attr):
        stacked = np.stack([getattr(p, attr) for p in pops])
        return stacked[src, idx]

    return Swarm(pick("x"), pick("v"), pick("p"), pick("f_best"), pick("f_cur"))


def select(code: str, P0: Swarm, P1: Swarm, P3: Swarm) -> Swarm:
    """Next population chosen from P0, P1 and P3 by their current fitness."""
    if not len(P0) == len(P1) == len(P3):
        raise InvalidConfig("selection needs populations of equal size")
    src, idx = select_indices(code, P0.f_cur, P1.f_cur, P3.f_cur)
    return _gather([P0, P1, P3], src, idx)


def recompute_velocity(x0, x3) -> np.ndarray:
    """Velocity implied by the displacement produced by mutation + crossover."""
    return np.asarray(x3, float) - np.asarray(x0, float)


# -- run loops ----------------------------------------------------------------

@dataclass
class HybridState:
    params: PsoParams
    topology: Topology
    adaptive: AdaptiveParams = field(default_factory=AdaptiveParams)
    p_top: float = P_TOP


def psode_step(P0: Swarm, spec: InstanceSpec, state: HybridState,
               evaluator: Evaluator, rng) -> Swarm:
    """One PSODE generation (2M evaluations).

    P1 is the PSO-moved copy of P0, P3 the DE trials built from P0; both are
    evaluated. Each index's personal-best memory is refreshed from both of its
    candidates before selection, so every survivor carries the updated memory
    of the index it came from. If the budget runs out mid-generation, P0 is
    left as it was and ``BudgetExhausted`` propagates.
    """
    if spec.kind != HYBRID:
        raise InvalidConfig("psode_step needs a hybrid instance")
    problem = evaluator.problem
    params = state.params.with_bounds(problem.lower, problem.upper)
    adj = state.topology.update(evaluator.budget.fraction, rng)
    x1, v1, f1 = pso_moved(P0, adj, spec.velocity, params, evaluator, rng)

    F, Cr = jade_sample(state.adaptive, rng, size=P0.M)
    x3_raw, x3, clamped = de_trials(P0, spec.mutation, spec.crossover, F, Cr,
                                    state.p_top, problem, rng)
    v3 = recompute_velocity(P0.x, x3_raw)
    v3[clamped] = 0.0
    f3 = evaluator(x3)

    p, f_best = P0.p, P0.f_best
    for x_new, f_new in ((x1, f1), (x3, f3)):
        improved = f_new < f_best
        p = np.where(improved[:, None], x_new, p)
        f_best = np.where(improved, f_new, f_best)

    pops = [Swarm(P0.x, P0.v, p, f_best, P0.f_cur),
            Swarm(x1, v1, p, f_best, f1),
            Swarm(x3, v3, p, f_best, f3)]
    src, idx = select_indices(spec.selection, P0.f_cur, f1, f3)

    survived = np.zeros(P0.M, dtype=bool)
    survived[idx[src == 2]] = True
    state.adaptive.record(F[survived], Cr[survived])
    jade_update(state.adaptive)
    return _gather(pops, src, idx)


@dataclass
class RunResult:
    """Outcome of one run.

    ``history`` holds the objective value of every evaluation in order, so
    ``trajectory()`` can report best-so-far after each one.
    """

    instance: str
    history: np.ndarray
    best_f: float
    best_x: np.ndarray
    max_evals: int
    population: Swarm | None = None

    @property
    def n_evals(self) -> int:
        return len(self.history)

    def trajectory(self) -> tuple[np.ndarray, np.ndarray]:
        """``(evals_used, best_so_far)`` after each evaluation (evals start at 1)."""
        return np.arange(1, self.n_evals + 1), np.minimum.accumulate(self.history)


def default_population_size(dim: int, multiplier: int = 5) -> int:
    return max(5, multiplier * dim)


def default_budget(dim: int, multiplier: int = 10_000) -> int:
    return multiplier * dim


def run(spec: InstanceSpec | str, problem: Problem, M: int | None = None,
        max_evals: int | None = None, seed: int | None = None,
        stop_fitness: float | None = None, pso_params: PsoParams | None = None,
        p_top: float = P_TOP) -> RunResult:
    """Run one instance until the budget is spent.

    ``stop_fitness`` optionally ends the run early once an evaluation reaches
    that value (useful when only target hitting times matter).
    """
    if isinstance(spec, str):
        spec = parse_name(spec, extended=True)
    n = problem.dim
    M = default_population_size(n) if M is None else M
    max_evals = default_budget(n) if max_evals is None else max_evals
    params = (pso_params or PsoParams()).with_bounds(problem.lower, problem.upper)

    rng = make_rng(seed)
    budget = Budget(max_evals)
    evaluator = Evaluator(problem, budget)
    swarm = init_population(problem, M, rng)

    def done():
        return stop_fitness is not None and evaluator.best_f <= stop_fitness

    try:
        evaluate_swarm(swarm, evaluator)
        if spec.kind == PSO:
            topology = Topology(spec.topology, M)
            while not done():
                swarm = pso_step(swarm, topology, spec.velocity, params, evaluator, rng)
        elif spec.kind == DE:
            adaptive = AdaptiveParams()
            while not done():
                swarm = de_step(swarm, spec.mutation, spec.crossover, adaptive, evaluator, rng, p_top)
        else:
            state = HybridState(params, Topology(spec.topology, M), p_top=p_top)
            while not done():
                swarm = psode_step(swarm, spec, state, evaluator, rng)
    except BudgetExhausted:
        pass
    return RunResult(spec.name, evaluator.history.copy(), evaluator.best_f,
                     evaluator.best_x, max_evals, swarm)
