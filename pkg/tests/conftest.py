import pytest

from sparsebeam import assemble, bundled_scenario_path, load_scenario


@pytest.fixture(scope="session")
def paper_scenario():
    return load_scenario(bundled_scenario_path())


@pytest.fixture(scope="session")
def paper_problem(paper_scenario):
    return assemble(paper_scenario)
