import pytest

from psode.core import Problem

from helpers import PinnedRng, sphere


@pytest.fixture
def pinned():
    return PinnedRng()


@pytest.fixture
def sphere2():
    return Problem(sphere, [-5, -5], [5, 5])


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
