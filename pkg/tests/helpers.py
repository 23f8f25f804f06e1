import numpy as np
from psode.core import Problem


class PinnedRng:
    """Stand-in generator whose uniform draws sit at their upper bound."""

    def uniform(self, low=0.0, high=1.0, size=None):
        return np.broadcast_to(np.asarray(high, float), size).copy()

    def normal(self, loc=0.0, scale=1.0, size=None):
        return np.asarray(loc, float).copy()


class CountingObjective:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


def make_sphere(n, vectorized=True, shift=0.0):
    if vectorized:
        def fn(X):
            return np.sum((np.atleast_2d(X) - shift) ** 2, axis=-1)
    else:
        def fn(x):
            return float(np.sum((x - shift) ** 2))
    return Problem(fn, np.full(n, -5.0), np.full(n, 5.0), vectorized=vectorized)


ACCEPTANCE_LINES = []


class criterion:
    """Record a PASS/FAIL line for an acceptance criterion around a block."""

    def __init__(self, number, title):
        self.number, self.title = number, title

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"[{status}] criterion {self.number:2d}: {self.title}"
        if exc_type is not None:
            line += f" ({exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return False
