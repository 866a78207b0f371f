import numpy as np
import pytest

from routecoach import AgentSpec, grid_graph, hilly_graph, line_graph


@pytest.fixture(scope="session")
def grid5():
    return grid_graph(5)


@pytest.fixture(scope="session")
def hilly():
    return hilly_graph()


@pytest.fixture()
def line():
    return line_graph((1.0, 1.0))


@pytest.fixture()
def line_specs():
    return (AgentSpec(agent_id=0, start=0, dest=2),)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
