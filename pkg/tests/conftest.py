import numpy as np
import pytest

from cogmap.core import GridMapping, Pedestrian, Scenario, Vec2


@pytest.fixture(scope="session")
def mapping():
    return GridMapping(8.0, 8.0, 80)


@pytest.fixture(scope="session")
def empty_scene(mapping):
    return Scenario(mapping, Vec2(4.0, 0.6), Vec2(4.0, 7.6))


def head_on_pedestrian(speed=0.6, x=4.0, y=6.0):
    return Pedestrian(1, Vec2(x, y), Vec2(0.0, -speed), Vec2(x, 0.0))


@pytest.fixture(scope="session")
def head_on_scene(mapping):
    return Scenario(mapping, Vec2(4.0, 0.6), Vec2(4.0, 7.6), pedestrians=(head_on_pedestrian(),))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
