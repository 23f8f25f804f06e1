"""scikit-learn style front-end for running a single algorithm instance."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bounds, check_population_size, check_positive_int, check_seed
from .core import Problem
from .engine import default_budget, default_population_size, parse_name, run


class ModularOptimizer(BaseEstimator):
    """Minimise a box-constrained function with any PSO, DE or PSODE instance.

    Parameters
    ----------
    instance : str
        Instance name such as ``"D_T1_B"``, ``"P_F_N"`` or ``"H_I_G_PB_B_P3"``.
    pop_size : int, optional
        Swarm size; defaults to ``5 * dim``.
    max_evals : int, optional
        Evaluation budget; defaults to ``10_000 * dim``.
    random_state : int, optional
        Seed of the run.
    stop_fitness : float, optional
        Stop as soon as an evaluation reaches this value.
    vectorized : bool
        Whether the objective accepts a ``(k, dim)`` matrix.

    Attributes
    ----------
    spec_ : InstanceSpec
    best_x_ : ndarray of shape (dim,)
    best_f_ : float
    n_evals_ : int
    history_ : ndarray
        Objective value of every evaluation, in order.

    Examples
    --------
    >>> import numpy as np
    >>> opt = ModularOptimizer("D_T1_B", max_evals=2000, random_state=0)
    >>> opt.fit(lambda x: float(np.sum(x ** 2)), [(-5, 5)] * 2).best_f_ < 1e-6
    True
    """

    def __init__(self, instance="H_I_G_PB_B_P3", pop_size=None, max_evals=None,
                 random_state=None, stop_fitness=None, vectorized=False):
        self.instance = instance
        self.pop_size = pop_size
        self.max_evals = max_evals
        self.random_state = random_state
        self.stop_fitness = stop_fitness
        self.vectorized = vectorized

    def fit(self, objective, bounds):
        spec = parse_name(self.instance, extended=True)
        lower, upper = check_bounds(bounds)
        dim = lower.size
        M = default_population_size(dim) if self.pop_size is None else check_population_size(self.pop_size)
        budget = default_budget(dim) if self.max_evals is None else check_positive_int(self.max_evals, "max_evals")
        problem = Problem(objective, lower, upper, vectorized=self.vectorized)

        result = run(spec, problem, M=M, max_evals=budget, seed=check_seed(self.random_state),
                     stop_fitness=self.stop_fitness)
        self.spec_ = spec
        self.result_ = result
        self.best_x_ = result.best_x
        self.best_f_ = result.best_f
        self.n_evals_ = result.n_evals
        self.history_ = result.history
        return self

    def trajectory(self) -> tuple[np.ndarray, np.ndarray]:
        """``(evals_used, best_so_far)`` of the fitted run."""
        check_is_fitted(self, "result_")
        return self.result_.trajectory()
