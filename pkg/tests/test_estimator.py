import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from psode import ModularOptimizer
from psode.core import InvalidConfig
from psode.engine import ParseError


def sphere(x):
    return float(np.sum((np.asarray(x) - 1.0) ** 2))


def test_params_round_trip():
    opt = ModularOptimizer("P_F_N", pop_size=8, max_evals=300, random_state=4)
    params = opt.get_params()
    assert params == {"instance": "P_F_N", "pop_size": 8, "max_evals": 300,
                      "random_state": 4, "stop_fitness": None, "vectorized": False}
    twin = clone(opt)
    assert twin.get_params() == params and twin is not opt
    twin.set_params(instance="D_T1_B")
    assert twin.instance == "D_T1_B" and opt.instance == "P_F_N"


def test_fit_sets_attributes():
    opt = ModularOptimizer("H_I_G_PB_B_P3", pop_size=6, max_evals=500, random_state=0)
    assert opt.fit(sphere, [(-5, 5)] * 3) is opt
    assert opt.best_x_.shape == (3,)
    assert opt.best_f_ == pytest.approx(sphere(opt.best_x_))
    assert opt.n_evals_ == 500 == len(opt.history_)
    evals, best = opt.trajectory()
    assert best[-1] == opt.best_f_ and np.all(np.diff(best) <= 0)


def test_bounds_as_lower_upper_arrays():
    a = ModularOptimizer("D_T1_B", max_evals=300, random_state=1).fit(sphere, ([-5, -5], [5, 5]))
    b = ModularOptimizer("D_T1_B", max_evals=300, random_state=1).fit(sphere, [(-5, 5), (-5, 5)])
    assert np.array_equal(a.history_, b.history_)


def test_vectorized_objective_gives_same_run():
    def rows(X):
        return np.sum((X - 1.0) ** 2, axis=1)

    a = ModularOptimizer("P_I_G", max_evals=400, random_state=2).fit(sphere, [(-3, 3)] * 2)
    b = ModularOptimizer("P_I_G", max_evals=400, random_state=2, vectorized=True).fit(rows, [(-3, 3)] * 2)
    assert np.allclose(a.history_, b.history_)


def test_defaults_scale_with_dimension():
    opt = ModularOptimizer("D_B1_B", random_state=0, stop_fitness=1e300).fit(sphere, [(-5, 5)] * 2)
    assert opt.result_.max_evals == 20_000
    assert opt.result_.population.M == 10


def test_trajectory_requires_fit():
    with pytest.raises(NotFittedError):
        ModularOptimizer().trajectory()


@pytest.mark.parametrize("kwargs, bounds, error", [
    ({"instance": "H_X_G_PB_B_P3"}, [(-1, 1)] * 2, ParseError),
    ({"pop_size": 4}, [(-1, 1)] * 2, InvalidConfig),
    ({"max_evals": 0}, [(-1, 1)] * 2, InvalidConfig),
    ({"random_state": -1}, [(-1, 1)] * 2, InvalidConfig),
    ({}, [(1, -1), (0, 1), (0, 1)], InvalidConfig),
    ({}, [(0, np.inf)] * 3, InvalidConfig),
    ({}, [1, 2, 3], InvalidConfig),
])
def test_validation_errors(kwargs, bounds, error):
    with pytest.raises(error):
        ModularOptimizer(max_evals=kwargs.pop("max_evals", 50), **kwargs).fit(sphere, bounds)
